#pragma once

#include <string_view>
#include <vector>

#include <json.hpp>

#include "ecd/model.hpp"

namespace ecd {

enum class Category { Groceries = 0, HouseholdGoodsAndMedicines = 1, OtherPackages = 2 };

std::string_view to_string(Category c);
Category parse_category(std::string_view text);

struct CategoryConfig {
  Category category = Category::OtherPackages;
  double adoption_rate = 0.5;
  double packages_per_order = 3.0;
  double adult_share = 0.8;  // share of household members aged 15 or older
  ParamOverrides overrides;

  void validate() const;
};

// Adoption 0.12 / 0.30 / 0.50, three packages per order, 80% adults.
std::vector<CategoryConfig> default_categories();

nlohmann::json to_json(const std::vector<CategoryConfig>& configs);
std::vector<CategoryConfig> categories_from_json(const nlohmann::json& j);

}  // namespace ecd
