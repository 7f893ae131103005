#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mpcm::text {

// Minimal UTF-8 <-> codepoint handling. Offsets throughout the pipeline are
// codepoint offsets (what SQuAD's answer_start counts), not byte offsets.
// Invalid bytes decode as U+FFFD, one replacement per bad byte.

std::vector<char32_t> utf8_decode(const std::string& s);
std::string utf8_encode(const std::vector<char32_t>& cps);
std::string utf8_encode(char32_t cp);

// Substring [from, to) of s in codepoint offsets, returned as UTF-8.
std::string substr_cp(const std::string& s, std::size_t from, std::size_t to);

std::size_t length_cp(const std::string& s);

bool is_space_cp(char32_t cp);
bool is_punct_cp(char32_t cp);

}  // namespace mpcm::text
