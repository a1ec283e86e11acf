#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probec/model.hpp"

namespace probec {

// Parses the line-oriented fact format:
//
//   [P::]happensAt(term, T).
//   [P::]holdsAt(term = value, T).
//   [P::]initially(term = value).
//
// `%` starts a comment. Unprefixed facts get probability 1.
std::vector<ProbFact> parse_facts(std::string_view text);

// Inverse of parse_facts. Probabilities use the shortest representation that
// parses back to the same double; certain facts are written without prefix.
std::string emit_facts(std::span<const ProbFact> facts);

std::string format_probability(double p);

// Reads and indexes a fact file.
Narrative load_narrative(const std::string& path);

// One ground-truth assertion holdsAt(F=V, T).
struct Annotation {
  Term term;
  Value value = true;
  Frame frame = 0;
};

// Ground-truth files hold crisp holdsAt facts only.
std::vector<Annotation> parse_annotations(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace probec
