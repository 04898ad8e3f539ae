#pragma once

#include "musemb/artist_sim.hpp"
#include "musemb/baselines.hpp"
#include "musemb/dataset.hpp"
#include "musemb/errors.hpp"
#include "musemb/evaluation.hpp"
#include "musemb/featurizer.hpp"
#include "musemb/io_util.hpp"
#include "musemb/losses.hpp"
#include "musemb/model.hpp"
#include "musemb/opcount.hpp"
#include "musemb/ranking.hpp"
#include "musemb/rng.hpp"
#include "musemb/sparse_vector.hpp"
#include "musemb/synthgen.hpp"
#include "musemb/trainer.hpp"
