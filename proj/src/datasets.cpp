#include "mqo/datasets.hpp"

#include <string>

namespace mqo::datasets {

Schema synthetic_schema() {
  std::vector<ColumnDef> cols;
  for (int i = 1; i <= 10; ++i) cols.push_back({"n_" + std::to_string(i), DataType::Int64});
  for (int i = 1; i <= 10; ++i) cols.push_back({"d_" + std::to_string(i), DataType::Float64});
  for (int i = 1; i <= 10; ++i) cols.push_back({"s_" + std::to_string(i), DataType::Utf8});
  return Schema(std::move(cols));
}

Catalog hr_catalog() {
  using T = DataType;
  Catalog c;
  c.tables.emplace("employees", Schema({{"id", T::Int64},
                                        {"name", T::Utf8},
                                        {"dep", T::Int64},
                                        {"age", T::Int64},
                                        {"gender", T::Utf8},
                                        {"hire_year", T::Int64}}));
  c.tables.emplace("departments", Schema({{"dept_id", T::Int64}, {"dept_name", T::Utf8}, {"location", T::Utf8}}));
  c.tables.emplace("salaries", Schema({{"emp_id", T::Int64},
                                       {"salary", T::Int64},
                                       {"from_date", T::Int64},
                                       {"to_date", T::Int64}}));
  c.tables.emplace("titles",
                   Schema({{"emp_id", T::Int64}, {"title", T::Utf8}, {"from", T::Int64}, {"to", T::Int64}}));
  return c;
}

Catalog star_catalog() {
  using T = DataType;
  Catalog c;
  c.tables.emplace("date_dim", Schema({{"d_date_sk", T::Int64},
                                       {"d_year", T::Int64},
                                       {"d_moy", T::Int64},
                                       {"d_day_name", T::Utf8}}));
  c.tables.emplace("item", Schema({{"i_item_sk", T::Int64},
                                   {"i_brand_id", T::Int64},
                                   {"i_brand", T::Utf8},
                                   {"i_manufact_id", T::Int64},
                                   {"i_manager_id", T::Int64},
                                   {"i_category", T::Utf8}}));
  c.tables.emplace("store", Schema({{"s_store_sk", T::Int64},
                                    {"s_store_name", T::Utf8},
                                    {"s_gmt_offset", T::Float64},
                                    {"s_state", T::Utf8}}));
  c.tables.emplace("store_sales", Schema({{"ss_sold_date_sk", T::Int64},
                                          {"ss_item_sk", T::Int64},
                                          {"ss_store_sk", T::Int64},
                                          {"ss_quantity", T::Int64},
                                          {"ss_sales_price", T::Float64},
                                          {"ss_ext_sales_price", T::Float64}}));
  return c;
}

Catalog pool_catalog() {
  Catalog c = star_catalog();
  c.tables.emplace(kSyntheticTable, synthetic_schema());
  return c;
}

}  // namespace mqo::datasets
