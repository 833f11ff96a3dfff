#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sagopt/dataset.hpp"
#include "sagopt/matrix.hpp"
#include "sagopt/models/params.hpp"

namespace sagopt {

using Json = nlohmann::ordered_json;

// Family-specific fitted state. Implementations are immutable after
// construction, so concurrent predict calls are safe.
class Regressor {
public:
    virtual ~Regressor() = default;

    [[nodiscard]] virtual double predict_row(std::span<const double> x) const = 0;
    [[nodiscard]] virtual Json to_json() const = 0;
    [[nodiscard]] virtual std::string summary() const = 0;
};

class FittedModel {
public:
    FittedModel(RegressorSpec spec, std::vector<std::string> feature_names, std::shared_ptr<const Regressor> impl,
                std::vector<std::string> warnings = {});

    [[nodiscard]] const RegressorSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    [[nodiscard]] const Regressor& impl() const noexcept { return *impl_; }

    template <class T>
    [[nodiscard]] const T* as() const
    {
        return dynamic_cast<const T*>(impl_.get());
    }

    // Both throw DimensionError when the width differs from feature_names().
    [[nodiscard]] double predict_row(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> predict(const Matrix& rows) const;

private:
    RegressorSpec spec_;
    std::vector<std::string> feature_names_;
    std::shared_ptr<const Regressor> impl_;
    std::vector<std::string> warnings_;
};

// Validates the spec and dispatches to the family trainer.
[[nodiscard]] FittedModel fit(const RegressorSpec& spec, const Dataset& data);

[[nodiscard]] inline std::vector<double> predict(const FittedModel& model, const Matrix& rows)
{
    return model.predict(rows);
}

} // namespace sagopt
