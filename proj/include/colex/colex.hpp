#pragma once

#include "colex/common.hpp"
#include "colex/verse_set.hpp"
#include "colex/corpus.hpp"
#include "colex/assoc.hpp"
#include "colex/graph.hpp"
#include "colex/walk.hpp"
#include "colex/embedding.hpp"
#include "colex/skipgram.hpp"
#include "colex/evalsuite.hpp"
#include "colex/analysis.hpp"
#include "colex/config.hpp"
