#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sagopt {

enum class ParamType { real, integer, boolean, choice };

struct ParamDecl {
    std::string key;
    ParamType type = ParamType::real;
    std::string default_value;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> choices; // ParamType::choice only
    std::string help;
};

struct FamilyInfo {
    std::string name;
    bool implemented = true;
    std::string description;
    std::vector<ParamDecl> params;
};

// A requested regressor: family tag, hyperparameter overrides (text values,
// validated against the family's declarations), and the seed for any
// stochastic step.
struct RegressorSpec {
    std::string family;
    std::map<std::string, std::string> hyperparameters;
    std::uint64_t seed = 0;

    bool operator==(const RegressorSpec&) const = default;
};

// Declared hyperparameters with defaults filled in and every value checked.
class ResolvedParams {
public:
    ResolvedParams(const FamilyInfo& family, const std::map<std::string, std::string>& overrides);

    [[nodiscard]] double real(std::string_view key) const;
    [[nodiscard]] long long integer(std::string_view key) const;
    [[nodiscard]] bool flag(std::string_view key) const;
    [[nodiscard]] const std::string& choice(std::string_view key) const;

    [[nodiscard]] const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }

private:
    [[nodiscard]] const std::string& raw(std::string_view key) const;
    std::map<std::string, std::string, std::less<>> values_;
};

// Every family the toolkit knows, including the registered-but-unimplemented
// ones (svm, bayesian, mlp, lstm).
[[nodiscard]] const std::vector<FamilyInfo>& family_registry();

// Throws ConfigError for a family name that is not registered at all.
[[nodiscard]] const FamilyInfo& family_info(std::string_view name);

// Validates the spec. Throws UnimplementedError for registered families that
// are out of scope, ConfigError for unknown families, keys or bad values.
[[nodiscard]] ResolvedParams resolve_params(const RegressorSpec& spec);

} // namespace sagopt
