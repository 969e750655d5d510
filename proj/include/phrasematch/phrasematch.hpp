#pragma once

#include "phrasematch/alignpool.hpp"
#include "phrasematch/checkpoint.hpp"
#include "phrasematch/corpus/datasets.hpp"
#include "phrasematch/corpus/embeddings.hpp"
#include "phrasematch/corpus/features.hpp"
#include "phrasematch/encoder.hpp"
#include "phrasematch/errors.hpp"
#include "phrasematch/harness/attention.hpp"
#include "phrasematch/harness/dataset.hpp"
#include "phrasematch/harness/format.hpp"
#include "phrasematch/harness/gradcheck.hpp"
#include "phrasematch/harness/ksweep.hpp"
#include "phrasematch/harness/metrics.hpp"
#include "phrasematch/harness/references.hpp"
#include "phrasematch/harness/synthetic.hpp"
#include "phrasematch/harness/train.hpp"
#include "phrasematch/matcher.hpp"
#include "phrasematch/numcore/adam.hpp"
#include "phrasematch/numcore/matrix.hpp"
#include "phrasematch/numcore/ops.hpp"
#include "phrasematch/numcore/regularize.hpp"
#include "phrasematch/numcore/tape.hpp"
#include "phrasematch/phrasebank.hpp"
