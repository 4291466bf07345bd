#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scoot/core.hpp"

namespace scoot {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Key/value + array document: one `key = value` per line, `#` comments,
// arrays in brackets. Values keep insertion order so a document can be
// round-tripped as a manifest.
class Scenario {
public:
    struct Value {
        std::string raw;                 // scalar text (number or word)
        std::vector<std::string> items;  // array elements, raw text
        bool is_array = false;
    };

    static Scenario parse_file(const std::string& path);
    static Scenario parse_text(const std::string& text, const std::string& origin = "<text>");

    bool has(const std::string& key) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::string word(const std::string& key) const;
    std::string word_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const;
    std::vector<std::string> words(const std::string& key) const;
    std::vector<std::string> words_or(const std::string& key,
                                      std::vector<std::string> fallback) const;

    void set(const std::string& key, double v);
    void set(const std::string& key, const std::string& v);
    void set(const std::string& key, const std::vector<double>& v);
    void set_words(const std::string& key, const std::vector<std::string>& v);

    std::string to_text() const;
    void write_file(const std::string& path) const;

private:
    const Value* find(const std::string& key) const;
    Value& upsert(const std::string& key);
    std::vector<std::pair<std::string, Value>> entries_;
};

// Builders from a scenario document.
SystemParams params_from_scenario(const Scenario& sc);
DesignVariables design_from_scenario(const Scenario& sc, const SystemParams& params);
OptimizerBounds bounds_from_scenario(const Scenario& sc);

// Serializers used by the manifest writer.
void scenario_set_params(Scenario& sc, const SystemParams& params);
void scenario_set_design(Scenario& sc, const DesignVariables& design);
void scenario_set_bounds(Scenario& sc, const OptimizerBounds& bounds);

} // namespace scoot
