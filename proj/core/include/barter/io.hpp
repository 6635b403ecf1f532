#pragma once

#include <filesystem>
#include <string>

#include "barter/economy.hpp"

namespace barter {

// Canonical instance JSON: {n, m, prices, weights, endowments, utilities, rationing?,
// capacities?, network?}; rationals are "num/den" strings.
std::string instance_to_json(const EconomyInstance& inst, int indent = 2);
EconomyInstance instance_from_json(const std::string& text);

EconomyInstance read_instance(const std::filesystem::path& path);
void write_instance(const EconomyInstance& inst, const std::filesystem::path& path);

std::string allocation_to_string(const Allocation& x);

}  // namespace barter
