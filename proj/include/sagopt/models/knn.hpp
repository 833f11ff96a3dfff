#pragma once

#include <memory>
#include <span>
#include <vector>

#include "sagopt/matrix.hpp"
#include "sagopt/models/linear.hpp"
#include "sagopt/models/regressor.hpp"

namespace sagopt {

enum class KnnWeighting { uniform, inverse_distance };

class KnnModel : public Regressor {
public:
    // Throws InvalidArgument unless 1 <= k <= rows.
    KnnModel(Matrix x, std::vector<double> y, std::size_t k, KnnWeighting weighting);

    [[nodiscard]] double predict_row(std::span<const double> x) const override { return predict_with(x, k_, weighting_); }
    // Same store, different k or weighting; k is range-checked.
    [[nodiscard]] double predict_with(std::span<const double> x, std::size_t k, KnnWeighting weighting) const;

    [[nodiscard]] const Matrix& train_x() const noexcept { return raw_; }
    [[nodiscard]] const std::vector<double>& train_y() const noexcept { return y_; }
    [[nodiscard]] std::size_t k() const noexcept { return k_; }
    [[nodiscard]] KnnWeighting weighting() const noexcept { return weighting_; }

    [[nodiscard]] Json to_json() const override;
    [[nodiscard]] std::string summary() const override;

private:
    Matrix raw_;
    Standardizer standardizer_;
    Matrix z_;
    std::vector<double> y_;
    std::size_t k_;
    KnnWeighting weighting_;
};

[[nodiscard]] inline double knn_predict(const KnnModel& model, std::span<const double> x, std::size_t k,
                                        KnnWeighting weighting)
{
    return model.predict_with(x, k, weighting);
}

} // namespace sagopt
