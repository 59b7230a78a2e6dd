#pragma once

// Umbrella header pulling in the whole library.

#include "tailclust/clustering.hpp"
#include "tailclust/dataset.hpp"
#include "tailclust/io.hpp"
#include "tailclust/matrix.hpp"
#include "tailclust/models.hpp"
#include "tailclust/parallel.hpp"
#include "tailclust/partition.hpp"
#include "tailclust/rng.hpp"
#include "tailclust/tail.hpp"
#include "tailclust/validation.hpp"
#include "tailclust/version.hpp"
