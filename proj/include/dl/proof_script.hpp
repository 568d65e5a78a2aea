#pragma once

// Proof scripts (.dlproof), one step per line:
//
//   goal <id> : <rule> [at (ante|succ) <index>] [with { key = value ; ... }]
//
// Keys: inv (loop), B or post (M), P (K), witness (allL, existsR) and
// sol (solve, written as @solution(t; x=..., v=...)). A `with` block may
// continue over several lines until its braces balance. `#` starts a
// comment.

#include <filesystem>
#include <string_view>
#include <vector>

#include "dl/kernel.hpp"

namespace dl {

std::vector<ProofStep> parse_proof_script(std::string_view src);
std::vector<ProofStep> load_proof_script(const std::filesystem::path& path);

}  // namespace dl
