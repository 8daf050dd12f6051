#pragma once

#include "hhi/backends/conllu_parser.hpp"
#include "hhi/backends/heuristic_parser.hpp"
#include "hhi/backends/http.hpp"
#include "hhi/backends/interfaces.hpp"
#include "hhi/backends/stubs.hpp"
#include "hhi/bench/imsitu.hpp"
#include "hhi/bench/wenda.hpp"
#include "hhi/captioner/decode.hpp"
#include "hhi/captioner/weights.hpp"
#include "hhi/core/errors.hpp"
#include "hhi/core/hash.hpp"
#include "hhi/core/jsonl.hpp"
#include "hhi/core/names.hpp"
#include "hhi/core/parallel.hpp"
#include "hhi/core/parse.hpp"
#include "hhi/core/random.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/core/text.hpp"
#include "hhi/core/types.hpp"
#include "hhi/distill/pseudo_label.hpp"
#include "hhi/distill/training.hpp"
#include "hhi/extract/harvest.hpp"
#include "hhi/extract/inflect.hpp"
#include "hhi/extract/rules.hpp"
#include "hhi/metrics/aggregate.hpp"
#include "hhi/metrics/evaluate.hpp"
#include "hhi/metrics/normalize.hpp"
#include "hhi/metrics/report.hpp"
#include "hhi/metrics/verbs.hpp"
#include "hhi/pipeline/backends.hpp"
#include "hhi/pipeline/config.hpp"
#include "hhi/pipeline/manifest.hpp"
#include "hhi/pipeline/stages.hpp"
#include "hhi/synth/filters.hpp"
#include "hhi/synth/novel.hpp"
#include "hhi/synth/postprocess.hpp"
#include "hhi/synth/prompts.hpp"
#include "hhi/synth/run.hpp"
#include "hhi/synth/types.hpp"
