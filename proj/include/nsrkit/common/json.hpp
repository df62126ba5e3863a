#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

#include <nlohmann/json.hpp>

namespace nsr {

/// Throws if `j` is not an object or holds a key outside `allowed`.
inline void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                               std::string_view where) {
    if (!j.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) {
            std::string list;
            for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
            throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "' (allowed: " + list + ")");
        }
    }
}

/// j[key] converted to T, or `fallback` when absent. Type errors name the key.
template <typename T>
T json_get(const nlohmann::json& j, const char* key, const T& fallback, std::string_view where) {
    if (!j.contains(key)) return fallback;
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!j.at(key).is_number_unsigned()) {
            throw std::invalid_argument(std::string(where) + "." + key + ": expected a non-negative integer");
        }
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(std::string(where) + "." + key + ": wrong value type");
    }
}

}  // namespace nsr
