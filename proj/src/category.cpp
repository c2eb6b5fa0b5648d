#include "ecd/category.hpp"

#include <array>
#include <cmath>
#include <string>

#include "ecd/error.hpp"
#include "ecd/model_io.hpp"

namespace ecd {

namespace {

constexpr std::array<std::string_view, 3> kCategoryLabels{
    "groceries", "household-goods-and-medicines", "other-packages"};

double number(const json& j, const char* key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

}  // namespace

std::string_view to_string(Category c) { return kCategoryLabels[static_cast<std::size_t>(c)]; }

Category parse_category(std::string_view text) {
  for (std::size_t i = 0; i < kCategoryLabels.size(); ++i)
    if (kCategoryLabels[i] == text) return static_cast<Category>(i);
  throw ConfigError("unknown category '" + std::string(text) + "'");
}

void CategoryConfig::validate() const {
  const std::string where(to_string(category));
  if (!(adoption_rate >= 0.0 && adoption_rate <= 1.0))
    throw ConfigError(where + ": adoption_rate must lie in [0, 1]");
  if (!std::isfinite(packages_per_order) || packages_per_order < 1.0)
    throw ConfigError(where + ": packages_per_order must be at least 1");
  if (!(adult_share > 0.0 && adult_share <= 1.0))
    throw ConfigError(where + ": adult_share must lie in (0, 1]");
  apply_overrides(ChoiceModelParams{}, overrides);
}

std::vector<CategoryConfig> default_categories() {
  return {{Category::Groceries, 0.12, 3.0, 0.8, {}},
          {Category::HouseholdGoodsAndMedicines, 0.30, 3.0, 0.8, {}},
          {Category::OtherPackages, 0.50, 3.0, 0.8, {}}};
}

nlohmann::json to_json(const std::vector<CategoryConfig>& configs) {
  json arr = json::array();
  for (const auto& c : configs)
    arr.push_back({{"category", std::string(to_string(c.category))},
                   {"adoption_rate", c.adoption_rate},
                   {"packages_per_order", c.packages_per_order},
                   {"adult_share", c.adult_share},
                   {"params", overrides_to_json(c.overrides)}});
  return {{"categories", arr}};
}

std::vector<CategoryConfig> categories_from_json(const nlohmann::json& j) {
  const json* arr = &j;
  if (j.is_object()) {
    if (!j.contains("categories")) throw ConfigError("category config: missing field 'categories'");
    arr = &j.at("categories");
  }
  if (!arr->is_array() || arr->empty())
    throw ConfigError("category config: 'categories' must be a non-empty array");
  std::vector<CategoryConfig> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto& jc = (*arr)[i];
    const std::string where = "categories[" + std::to_string(i) + "]";
    if (!jc.is_object() || !jc.contains("category") || !jc.at("category").is_string())
      throw ConfigError(where + ": missing string field 'category'");
    CategoryConfig c;
    c.category = parse_category(jc.at("category").get<std::string>());
    const auto defaults = default_categories()[static_cast<std::size_t>(c.category)];
    c.adoption_rate = number(jc, "adoption_rate", where, defaults.adoption_rate);
    c.packages_per_order = number(jc, "packages_per_order", where, defaults.packages_per_order);
    c.adult_share = number(jc, "adult_share", where, defaults.adult_share);
    if (jc.contains("params")) c.overrides = overrides_from_json(jc.at("params"));
    c.validate();
    for (const auto& prev : out)
      if (prev.category == c.category) throw ConfigError(where + ": category listed twice");
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace ecd
