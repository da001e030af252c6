#pragma once

#include "stag/bench.hpp"
#include "stag/corpus.hpp"
#include "stag/crf.hpp"
#include "stag/features.hpp"
#include "stag/grammar.hpp"
#include "stag/linear.hpp"
#include "stag/metrics.hpp"
#include "stag/model_io.hpp"
#include "stag/parser.hpp"
#include "stag/predictions.hpp"
#include "stag/tagger.hpp"
#include "stag/types.hpp"
#include "stag/unify.hpp"
