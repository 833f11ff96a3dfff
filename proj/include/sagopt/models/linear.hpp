#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sagopt/matrix.hpp"
#include "sagopt/models/regressor.hpp"

namespace sagopt {

// y = intercept + coef . x in the original feature units.
class LinearModel : public Regressor {
public:
    LinearModel(double intercept, std::vector<double> coef);

    [[nodiscard]] double intercept() const noexcept { return intercept_; }
    [[nodiscard]] const std::vector<double>& coef() const noexcept { return coef_; }

    [[nodiscard]] double predict_row(std::span<const double> x) const override;
    [[nodiscard]] Json to_json() const override;
    [[nodiscard]] std::string summary() const override;

private:
    double intercept_;
    std::vector<double> coef_;
};

// Per-column centering and population standard deviation; a constant column
// gets scale 1 so it maps to zero.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    [[nodiscard]] static Standardizer fit(const Matrix& x);
    [[nodiscard]] Matrix apply(const Matrix& x) const;
};

// Least squares with an intercept; rank-deficient designs give the
// minimum-norm slope vector.
[[nodiscard]] std::shared_ptr<const LinearModel> fit_ols(const Matrix& x, std::span<const double> y);

struct CoordinateDescentFit {
    std::shared_ptr<const LinearModel> model;
    std::vector<double> standardized_coef;
    std::size_t sweeps = 0;
    bool converged = false;
};

// Minimizes 0.5*||yc - Z w||^2 + l1*||w||_1 + l2*||w||_2^2 over standardized
// features Z and centered target yc by cyclic coordinate descent.
[[nodiscard]] CoordinateDescentFit fit_coordinate_descent(const Matrix& x, std::span<const double> y, double l1,
                                                         double l2, double tol, std::size_t max_sweeps);

// Per-sample updates w += rate * (y - w.z) * z on standardized features with a
// bias term, visiting rows in a freshly shuffled order each epoch.
[[nodiscard]] std::shared_ptr<const LinearModel> fit_sgd(const Matrix& x, std::span<const double> y, double rate,
                                                        std::size_t epochs, std::uint64_t seed);

} // namespace sagopt
