#pragma once

// Small text helpers shared by the building, scenario and CSV readers.

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

std::vector<std::string> split_lines(std::string_view text);
std::string_view strip_comment(std::string_view line);
std::string_view trim(std::string_view s);
std::vector<std::string> tokenize(std::string_view line);
std::vector<std::string> split(std::string_view s, char sep);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Strict whole-token number parse; throws std::invalid_argument.
template <typename T>
T parse_number(std::string_view token) {
    T value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw std::invalid_argument("invalid number `" + std::string(token) + "`");
    }
    return value;
}

}  // namespace evac
