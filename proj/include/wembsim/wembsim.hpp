#pragma once

#include "wembsim/baselines.hpp"
#include "wembsim/dataset.hpp"
#include "wembsim/embedding_table.hpp"
#include "wembsim/error.hpp"
#include "wembsim/harness.hpp"
#include "wembsim/preprocess.hpp"
#include "wembsim/rng.hpp"
#include "wembsim/score.hpp"
#include "wembsim/stats.hpp"
#include "wembsim/transport.hpp"
