#pragma once

// JSON-over-HTTP clients for out-of-process model servers. Every backend
// POSTs one JSON object and expects one JSON object back:
//
//   POST {base}/generate    {prompt, params}        -> {text}
//   POST {base}/nli         {premise, hypothesis}   -> {entailment, contradiction, neutral}
//   POST {base}/parse       {text}                  -> {conllu}
//   POST {base}/similarity  {candidate, reference}  -> {score}
//   POST {base}/summarize   {input}                 -> {text}
//   POST {base}/decode      {image_ref, width}      -> {beams: [{text, score}]}
//
// Transport failures, non-200 replies and malformed bodies raise
// BackendError.

#include <chrono>
#include <memory>
#include <sstream>
#include <string>

#include <httplib.h>

#include "hhi/backends/interfaces.hpp"
#include "hhi/core/parse.hpp"
#include "hhi/core/serde.hpp"

namespace hhi {

class HttpJsonClient {
 public:
  /// `endpoint` is "http://host:port" optionally followed by a base path.
  explicit HttpJsonClient(const std::string& endpoint, std::chrono::seconds timeout = std::chrono::seconds(60)) {
    auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw ValidationError("endpoint needs a scheme: '" + endpoint + "'");
    auto slash = endpoint.find('/', scheme + 3);
    origin_ = endpoint.substr(0, slash);
    base_ = slash == std::string::npos ? std::string() : endpoint.substr(slash);
    while (!base_.empty() && base_.back() == '/') base_.pop_back();
    if (endpoint.compare(0, scheme, "http") != 0)
      throw ValidationError("only http:// endpoints are supported: '" + endpoint + "'");
    timeout_ = timeout;
  }

  Json post(const std::string& route, const Json& body) const {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_write_timeout(timeout_);
    auto res = cli.Post(base_ + route, body.dump(), "application/json");
    if (!res)
      throw BackendError("request to " + origin_ + base_ + route + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw BackendError("request to " + origin_ + base_ + route + " returned HTTP " + std::to_string(res->status));
    try {
      return Json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendError("malformed reply from " + origin_ + base_ + route + ": " + e.what());
    }
  }

  const std::string& endpoint() const { return origin_; }

 private:
  std::string origin_;
  std::string base_;
  std::chrono::seconds timeout_{60};
};

template <class T>
T http_field(const Json& j, const char* key, const std::string& route) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError("reply from " + route + " lacks field '" + key + "'");
  }
}

class HttpGenerator : public TextGeneratorBackend {
 public:
  explicit HttpGenerator(const std::string& endpoint) : client_(endpoint) {}
  std::string generate(const std::string& prompt, const GenerationParams& params) const override {
    auto r = client_.post("/generate", Json{{"prompt", prompt}, {"params", params}});
    return http_field<std::string>(r, "text", "/generate");
  }

 private:
  HttpJsonClient client_;
};

class HttpNli : public NliBackend {
 public:
  explicit HttpNli(const std::string& endpoint) : client_(endpoint) {}
  NliScores score(const std::string& premise, const std::string& hypothesis) const override {
    auto r = client_.post("/nli", Json{{"premise", premise}, {"hypothesis", hypothesis}});
    NliScores s{http_field<double>(r, "entailment", "/nli"), http_field<double>(r, "contradiction", "/nli"),
                http_field<double>(r, "neutral", "/nli")};
    s.validate();
    return s;
  }

 private:
  HttpJsonClient client_;
};

class HttpParser : public ParserBackend {
 public:
  explicit HttpParser(const std::string& endpoint) : client_(endpoint) {}
  DependencyParse parse(const std::string& text) const override {
    auto r = client_.post("/parse", Json{{"text", text}});
    std::istringstream in(http_field<std::string>(r, "conllu", "/parse"));
    std::vector<DependencyParse> parses;
    try {
      parses = read_conllu(in);
    } catch (const ValidationError& e) {
      throw BackendError(std::string("parser returned invalid CoNLL-U: ") + e.what());
    }
    if (parses.size() != 1)
      throw BackendError("parser returned " + std::to_string(parses.size()) + " sentences, expected 1");
    return parses.front();
  }

 private:
  HttpJsonClient client_;
};

class HttpSimilarity : public TextSimilarityBackend {
 public:
  explicit HttpSimilarity(const std::string& endpoint) : client_(endpoint) {}
  double score(const std::string& candidate, const std::string& reference) const override {
    auto r = client_.post("/similarity", Json{{"candidate", candidate}, {"reference", reference}});
    return http_field<double>(r, "score", "/similarity");
  }

 private:
  HttpJsonClient client_;
};

/// A summarizer trained and hosted elsewhere; fit() only checks that the
/// server answers.
class HttpSummarizerModel : public SummarizerModel {
 public:
  explicit HttpSummarizerModel(const std::string& endpoint) : endpoint_(endpoint), client_(endpoint) {}
  std::string summarize(const std::string& input) const override {
    auto r = client_.post("/summarize", Json{{"input", input}});
    return http_field<std::string>(r, "text", "/summarize");
  }
  Json describe() const override { return Json{{"kind", "http"}, {"endpoint", endpoint_}}; }

 private:
  std::string endpoint_;
  HttpJsonClient client_;
};

class HttpCaptionerModel : public CaptionerModel {
 public:
  explicit HttpCaptionerModel(const std::string& endpoint) : endpoint_(endpoint), client_(endpoint) {}
  BeamSet decode(const std::string& image_ref, int width) const override {
    auto r = client_.post("/decode", Json{{"image_ref", image_ref}, {"width", width}});
    BeamSet out;
    out.width = width;
    out.beams = http_field<std::vector<Beam>>(r, "beams", "/decode");
    try {
      out.validate();
    } catch (const ValidationError& e) {
      throw BackendError(std::string("captioner server: ") + e.what());
    }
    return out;
  }
  Json config_echo() const override { return Json{{"endpoint", endpoint_}}; }
  Json describe() const override { return Json{{"kind", "http"}, {"endpoint", endpoint_}}; }

 private:
  std::string endpoint_;
  HttpJsonClient client_;
};

}  // namespace hhi
