#pragma once

#include <functional>
#include <string>
#include <vector>

namespace longcot {

// Splits on '\n', ignoring a trailing empty line. Blank interior lines are
// preserved so line numbers in error reports stay honest.
std::vector<std::string> read_jsonl_lines(const std::string& path);

void write_jsonl_lines(const std::string& path, const std::vector<std::string>& lines);

// Appends a single line and flushes (incremental checkpoints).
void append_jsonl_line(const std::string& path, const std::string& line);

}  // namespace longcot
