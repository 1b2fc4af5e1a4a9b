#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "potpot/dataset.hpp"

namespace potpot {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer over (master, stream): the stream-splitting rule
/// behind every derived seed (replications, classes, train/test draws).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct GeneratedSet {
    std::string name;
    LabeledDataset train;
    LabeledDataset test;
    DensityFn true_density;
    std::vector<double> priors;  ///< population class probabilities used by the Bayes rule
};

enum class NormalFamily { Location, Scale, ScaleStar, Rotation };

struct NormalSpec {
    Vector mean;
    Matrix covariance;
};

/// Class distributions of the bivariate normal families.
/// Location l=1..4, Scale s=1..5, Scale* s=1..5, Rotation 1..9.
std::array<NormalSpec, 2> normal_family_specs(NormalFamily family, int index);

/// Series 1: 100/100 train, 300/300 test. Series 2: 1000/300 train and test.
GeneratedSet gen_normal_series(int series, NormalFamily family, int index, std::uint64_t seed);

/// C₁ ~ U(0,1)+U(2,3), C₂ ~ U(1,2)+U(3,4) in radius; test sizes are three times the training sizes.
GeneratedSet gen_disks(int n1, int n2, std::uint64_t seed, int dim = 2);

struct HypersphereSet : GeneratedSet {
    double raw_probability = 0.0;  ///< analytic P(raw class 1)
    double raw_fraction = 0.0;     ///< empirical raw class-1 frequency in the training sample
    double balance = 0.0;          ///< empirical class-1 frequency after flipping
};

/// Uniform points in the radius-4 ball; raw class 1 iff ‖x‖ ∈ (0,1)∪(2,3);
/// labels are swapped on the half x₁ > 0.
HypersphereSet gen_hyperspheres(int d, int n, std::uint64_t seed);

/// (1 + 3^d − 2^d) / 4^d.
double hypersphere_class1_probability(int d);

/// Builds a set from a name: 1dist3, 2scale2, 1scale*4, 1rotate5, disks_100x100,
/// hypersphere_d3_n250.
GeneratedSet generate_by_name(const std::string& name, std::uint64_t seed);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;
};

/// Runs stat(derive_seed(master, r)) for r = 0..count−1 and summarizes.
Summary replicate(int count, std::uint64_t master_seed, const std::function<double(std::uint64_t)>& stat,
                  unsigned threads = 1);

/// Multivariate normal density.
double normal_density(const Vector& x, const NormalSpec& spec);

}  // namespace potpot
