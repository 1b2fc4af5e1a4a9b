#pragma once

#include <functional>
#include <string>
#include <vector>

#include "potpot/dataset.hpp"
#include "potpot/numkit.hpp"

namespace potpot {

enum class ScalingMode { Joint, Separate };

const char* to_string(ScalingMode mode);
ScalingMode scaling_mode_from(const std::string& name);

inline constexpr double kMinH2 = 1e-3;
inline constexpr double kMaxH2 = 1e3;

/// Bandwidth parameters h² multiplying the sphered identity kernel.
/// Joint: one shared value. Separate: one value per class.
struct BandwidthConfig {
    ScalingMode mode = ScalingMode::Joint;
    std::vector<double> h2;

    static BandwidthConfig joint(double h2) { return {ScalingMode::Joint, {h2}}; }
    static BandwidthConfig separate(std::vector<double> h2) { return {ScalingMode::Separate, std::move(h2)}; }

    /// h² applied to class j (1-based).
    double for_class(int j) const { return mode == ScalingMode::Joint ? h2.at(0) : h2.at(static_cast<std::size_t>(j - 1)); }
    /// Throws unless the length matches the mode and every h² lies in [10⁻³, 10³].
    void validate(int classes) const;
    bool operator==(const BandwidthConfig&) const = default;
};

/// Spherical kernel K(z) = c_d · r(zᵀz), carried in log form.
struct SphericalKernel {
    double (*log_profile)(double squared_norm);
    double (*log_constant)(int dim);
};

/// The standard Gaussian, K(z) = (2π)^{-d/2} exp(−zᵀz/2).
SphericalKernel gaussian();

double gaussian_kernel(const Vector& u);

/// Robust-estimate hook: maps a class (or pooled) sample to its scatter matrix.
using CovarianceEstimator = std::function<Matrix(const Matrix& points)>;

struct FitOptions {
    CovarianceEstimator covariance;  ///< empty means empirical covariance
    double eigen_tol = kEigenTolerance;
    SphericalKernel kernel = gaussian();
};

/// Per-class fitted state. `sphered` holds the class points already mapped
/// through `transform`, so evaluation is a plain spherical-kernel sum.
struct ClassKernel {
    double prior = 0.0;
    SpheringTransform transform;
    Matrix sphered;
    double h2 = 1.0;
};

class PotentialModel {
public:
    ScalingMode mode = ScalingMode::Joint;
    Eigen::Index total = 0;
    Eigen::Index dim = 0;
    std::vector<ClassKernel> kernels;
    SphericalKernel kernel = gaussian();
    std::vector<std::string> warnings;

    int classes() const { return static_cast<int>(kernels.size()); }
    std::vector<double> priors() const;

    /// log φ̂_j(x); −inf when the kernel sum underflows entirely.
    double log_potential(const Vector& x, int j) const;
    /// log of the normalizing factor (1/n)·|det H_j|^{-1/2}·c_r for class j at a given h².
    double log_scale(int j, double h2) const;

    /// Replaces the bandwidths without refitting the sphering.
    void set_bandwidth(const BandwidthConfig& cfg);
};

/// Fits the sphering transforms only; every h² is left at 1.
PotentialModel fit_sphering(const LabeledDataset& data, ScalingMode mode, const FitOptions& options = {});

PotentialModel fit_potential_model(const LabeledDataset& data, const BandwidthConfig& cfg,
                                   const FitOptions& options = {});

/// φ̂_j(x) = (1/n) Σ_i |det H_j|^{-1/2} K(H_j^{-1/2}(x − x_ji)).
double potential_at(const PotentialModel& model, const Vector& x, int j);

/// The potential-space image of a labeled sample.
struct PotPotPlot {
    Matrix z;  ///< n × q, entry (i, j) = φ̂_{j+1}(x_i)
    std::vector<int> labels;
    std::vector<double> priors;

    Eigen::Index size() const { return z.rows(); }
    int classes() const { return static_cast<int>(z.cols()); }
    /// Keeps two columns and the points of those classes, relabeled 1/2.
    PotPotPlot pair(int a, int b) const;
};

/// One row per input point, one column per class.
Matrix pot_pot_transform(const PotentialModel& model, const Matrix& points);
PotPotPlot pot_pot_plot(const PotentialModel& model, const LabeledDataset& data);

/// Squared sphered distances from a fixed query set to every class sample.
/// Lets a grid of bandwidths reuse one O(n·n_j·d) precompute.
class DistanceCache {
public:
    DistanceCache(const PotentialModel& sphering, const Matrix& queries);

    Eigen::Index queries() const { return n_queries_; }
    /// Potentials of all queries for class j (1-based) at bandwidth h².
    Vector potentials(int j, double h2) const;
    Vector log_potentials(int j, double h2) const;

private:
    SphericalKernel kernel_;
    Eigen::Index total_;
    std::vector<int> rank_;
    std::vector<double> log_det_;
    Eigen::Index n_queries_;
    std::vector<Matrix> sq_dist_;  // per class, n_j × n_queries (column per query)
};

}  // namespace potpot
