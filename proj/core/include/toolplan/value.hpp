#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "toolplan/rng.hpp"

namespace toolplan {

// Runtime value passed to and produced by tools.
using Value = std::variant<std::int64_t, double, std::string>;

enum class ValueType { Integer, Real, String };

inline bool value_matches_type(const Value& v, ValueType t) {
    switch (t) {
        case ValueType::Integer: return std::holds_alternative<std::int64_t>(v);
        case ValueType::Real: return std::holds_alternative<double>(v);
        case ValueType::String: return std::holds_alternative<std::string>(v);
    }
    return false;
}

inline const char* value_type_name(ValueType t) {
    switch (t) {
        case ValueType::Integer: return "integer";
        case ValueType::Real: return "real";
        case ValueType::String: return "string";
    }
    return "unknown";
}

// std::map keeps keys in lexicographic order, which is the canonical
// iteration order for hashing and serialization.
using ArgumentMap = std::map<std::string, Value>;

inline std::uint64_t hash_value(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return hash_combine(0x11, static_cast<std::uint64_t>(*i));
    }
    if (const auto* d = std::get_if<double>(&v)) {
        std::uint64_t bits = 0;
        static_assert(sizeof(bits) == sizeof(*d));
        __builtin_memcpy(&bits, d, sizeof(bits));
        return hash_combine(0x22, bits);
    }
    return hash_combine(0x33, hash_bytes(std::get<std::string>(v)));
}

}  // namespace toolplan
