#include "longcot/jsonl.hpp"

#include <fstream>
#include <stdexcept>

#include "longcot/common.hpp"

namespace longcot {

std::vector<std::string> read_jsonl_lines(const std::string& path) {
    std::string content = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos) {
            if (start < content.size()) {
                lines.push_back(content.substr(start));
            }
            break;
        }
        lines.push_back(content.substr(start, nl - start));
        start = nl + 1;
    }
    // A file ending in '\n' has no final empty record.
    return lines;
}

void write_jsonl_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::string joined;
    for (const auto& line : lines) {
        joined += line;
        joined += '\n';
    }
    write_file(path, joined);
}

void append_jsonl_line(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw std::runtime_error("cannot append to file: " + path);
    }
    out << line << '\n';
    out.flush();
    if (!out) {
        throw std::runtime_error("append failed: " + path);
    }
}

}  // namespace longcot
