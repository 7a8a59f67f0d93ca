#pragma once

// Seeded random ensembles: Hilbert-Schmidt density matrices, Haar unitaries,
// Gaussian Hermitian matrices and vectors.

#include "relmod/matrix_engine.hpp"

#include <cstdint>
#include <random>

namespace relmod {

using Rng = std::mt19937_64;

CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng);
CVector complex_gaussian_vector(Eigen::Index n, Rng& rng);

/// G G^dagger / tr(G G^dagger), G complex Gaussian d x d.
CMatrix random_density(Eigen::Index d, Rng& rng);

/// Haar unitary from the QR factorisation of a Gaussian matrix (phases fixed).
CMatrix haar_unitary(Eigen::Index d, Rng& rng);

/// (G + G^dagger) / 2 for complex Gaussian G.
CMatrix random_hermitian(Eigen::Index d, Rng& rng);

double uniform(Rng& rng, double lo, double hi);

}  // namespace relmod
