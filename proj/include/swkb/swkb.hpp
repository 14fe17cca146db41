#pragma once

// Everything except the HTTP service (swkb/service.hpp), which pulls in the
// networking headers.

#include "swkb/config.hpp"
#include "swkb/corpus.hpp"
#include "swkb/decoder.hpp"
#include "swkb/error.hpp"
#include "swkb/eval.hpp"
#include "swkb/fst.hpp"
#include "swkb/lexicon_fst.hpp"
#include "swkb/lm.hpp"
#include "swkb/morpho.hpp"
#include "swkb/pipeline.hpp"
#include "swkb/spatial.hpp"
#include "swkb/synthetic.hpp"
#include "swkb/utf8.hpp"
