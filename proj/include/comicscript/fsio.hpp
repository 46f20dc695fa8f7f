#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace comicscript {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);

}  // namespace comicscript
