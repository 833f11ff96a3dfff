#include "sagopt/models/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "sagopt/error.hpp"
#include "sagopt/random.hpp"

namespace sagopt {

namespace {

void check_xy(const Matrix& x, std::span<const double> y)
{
    if (x.rows() != y.size()) {
        throw DimensionError("feature rows and target length differ");
    }
    if (x.rows() == 0) {
        throw InvalidArgument("cannot fit on zero rows");
    }
}

double mean_of(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Map standardized slopes back to original units.
std::shared_ptr<const LinearModel> destandardize(const Standardizer& s, const std::vector<double>& w, double y_mean)
{
    std::vector<double> coef(w.size());
    double intercept = y_mean;
    for (std::size_t j = 0; j < w.size(); ++j) {
        coef[j] = w[j] / s.scale[j];
        intercept -= coef[j] * s.mean[j];
    }
    return std::make_shared<const LinearModel>(intercept, std::move(coef));
}

} // namespace

LinearModel::LinearModel(double intercept, std::vector<double> coef) : intercept_(intercept), coef_(std::move(coef)) {}

double LinearModel::predict_row(std::span<const double> x) const
{
    double s = intercept_;
    for (std::size_t j = 0; j < coef_.size(); ++j) {
        s += coef_[j] * x[j];
    }
    return s;
}

Json LinearModel::to_json() const
{
    return Json{{"kind", "linear"}, {"intercept", intercept_}, {"coef", coef_}};
}

std::string LinearModel::summary() const
{
    std::size_t nonzero = 0;
    for (const double c : coef_) {
        nonzero += c != 0.0 ? 1 : 0;
    }
    return fmt::format("linear: intercept {}, {} of {} coefficients nonzero", intercept_, nonzero, coef_.size());
}

Standardizer Standardizer::fit(const Matrix& x)
{
    Standardizer s;
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m += x(i, j);
        }
        m /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v += (x(i, j) - m) * (x(i, j) - m);
        }
        const double sd = std::sqrt(v / static_cast<double>(n));
        s.mean[j] = m;
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const
{
    Matrix z(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            z(i, j) = (x(i, j) - mean[j]) / scale[j];
        }
    }
    return z;
}

std::shared_ptr<const LinearModel> fit_ols(const Matrix& x, std::span<const double> y)
{
    check_xy(x, y);
    const auto n = static_cast<Eigen::Index>(x.rows());
    const auto d = static_cast<Eigen::Index>(x.cols());
    const double y_mean = mean_of(y);
    std::vector<double> x_mean(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            x_mean[j] += x(i, j);
        }
    }
    for (auto& m : x_mean) {
        m /= static_cast<double>(x.rows());
    }
    Eigen::MatrixXd a(n, d);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            a(i, j) = x(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - x_mean[static_cast<std::size_t>(j)];
        }
        b(i) = y[static_cast<std::size_t>(i)] - y_mean;
    }
    std::vector<double> coef(x.cols(), 0.0);
    if (d > 0) {
        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
        const Eigen::VectorXd w = cod.solve(b);
        for (Eigen::Index j = 0; j < d; ++j) {
            coef[static_cast<std::size_t>(j)] = w(j);
        }
    }
    double intercept = y_mean;
    for (std::size_t j = 0; j < coef.size(); ++j) {
        intercept -= coef[j] * x_mean[j];
    }
    return std::make_shared<const LinearModel>(intercept, std::move(coef));
}

CoordinateDescentFit fit_coordinate_descent(const Matrix& x, std::span<const double> y, double l1, double l2,
                                            double tol, std::size_t max_sweeps)
{
    check_xy(x, y);
    if (l1 < 0.0 || l2 < 0.0) {
        throw InvalidArgument("penalty weights must be non-negative");
    }
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const Standardizer s = Standardizer::fit(x);
    // Column-major standardized copy for the per-coordinate inner products.
    std::vector<std::vector<double>> z(d, std::vector<double>(n));
    std::vector<double> norm2(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            z[j][i] = (x(i, j) - s.mean[j]) / s.scale[j];
            norm2[j] += z[j][i] * z[j][i];
        }
    }
    const double y_mean = mean_of(y);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = y[i] - y_mean;
    }
    std::vector<double> w(d, 0.0);
    CoordinateDescentFit out;
    for (out.sweeps = 0; out.sweeps < max_sweeps;) {
        ++out.sweeps;
        double max_change = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (norm2[j] == 0.0) {
                continue;
            }
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                rho += z[j][i] * r[i];
            }
            rho += norm2[j] * w[j];
            double next = 0.0;
            if (rho > l1) {
                next = (rho - l1) / (norm2[j] + 2.0 * l2);
            } else if (rho < -l1) {
                next = (rho + l1) / (norm2[j] + 2.0 * l2);
            }
            const double delta = next - w[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    r[i] -= delta * z[j][i];
                }
                w[j] = next;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        if (max_change < tol) {
            out.converged = true;
            break;
        }
    }
    out.model = destandardize(s, w, y_mean);
    out.standardized_coef = std::move(w);
    return out;
}

std::shared_ptr<const LinearModel> fit_sgd(const Matrix& x, std::span<const double> y, double rate,
                                          std::size_t epochs, std::uint64_t seed)
{
    check_xy(x, y);
    if (!(rate > 0.0) || epochs == 0) {
        throw InvalidArgument("sgd needs a positive learning rate and at least one epoch");
    }
    const std::size_t d = x.cols();
    const Standardizer s = Standardizer::fit(x);
    const Matrix z = s.apply(x);
    std::vector<double> w(d, 0.0);
    double bias = 0.0;
    Rng rng = make_rng(seed, {0x5364ULL});
    for (std::size_t e = 0; e < epochs; ++e) {
        for (const auto i : random_permutation(x.rows(), rng)) {
            const auto zi = z.row(i);
            double pred = bias;
            for (std::size_t j = 0; j < d; ++j) {
                pred += w[j] * zi[j];
            }
            const double step = rate * (y[i] - pred);
            bias += step;
            for (std::size_t j = 0; j < d; ++j) {
                w[j] += step * zi[j];
            }
        }
    }
    std::vector<double> coef(d);
    double intercept = bias;
    for (std::size_t j = 0; j < d; ++j) {
        coef[j] = w[j] / s.scale[j];
        intercept -= coef[j] * s.mean[j];
    }
    if (!std::isfinite(intercept) || !std::all_of(coef.begin(), coef.end(), [](double c) { return std::isfinite(c); })) {
        throw InvalidArgument("sgd diverged; lower the learning rate");
    }
    return std::make_shared<const LinearModel>(intercept, std::move(coef));
}

} // namespace sagopt
