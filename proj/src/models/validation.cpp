#include "sagopt/models/validation.hpp"

#include <limits>

#include "sagopt/models/regressor.hpp"
#include "sagopt/parallel.hpp"

namespace sagopt {

CrossValidation cross_validate(const RegressorSpec& spec, const Dataset& data, const FoldAssignment& folds,
                               const MetricOptions& options)
{
    (void)resolve_params(spec);
    CrossValidation cv;
    cv.label = spec.family;
    cv.spec = spec;
    cv.folds.resize(folds.k);
    std::vector<std::vector<std::string>> warnings(folds.k);
    parallel_for(folds.k, [&](std::size_t f) {
        const auto train = data.select_rows(folds.train_rows(f));
        const auto test = data.select_rows(folds.test_rows(f));
        const FittedModel model = fit(spec, train);
        cv.folds[f] = compute_metrics(model.predict(test.features()), test.target(), options);
        warnings[f] = model.warnings();
    });
    for (std::size_t f = 0; f < folds.k; ++f) {
        for (const auto& w : warnings[f]) {
            cv.warnings.push_back("fold " + std::to_string(f) + ": " + w);
        }
    }
    cv.summary = summarize_folds(cv.folds);
    return cv;
}

std::vector<CrossValidation> compare_models(const std::vector<std::pair<std::string, RegressorSpec>>& specs,
                                            const Dataset& data, const FoldAssignment& folds,
                                            const MetricOptions& options)
{
    std::vector<CrossValidation> out;
    out.reserve(specs.size());
    for (const auto& [label, spec] : specs) {
        out.push_back(cross_validate(spec, data, folds, options));
        out.back().label = label;
    }
    return out;
}

double holdout_r2(std::span<const double> pred, std::span<const double> actual)
{
    const auto r2 = compute_metrics(pred, actual).r2;
    return r2 ? *r2 : -std::numeric_limits<double>::infinity();
}

} // namespace sagopt
