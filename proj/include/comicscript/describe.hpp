#pragma once

#include <string>
#include <vector>

#include "comicscript/clustering.hpp"
#include "comicscript/image.hpp"
#include "comicscript/llm.hpp"
#include "comicscript/naming.hpp"
#include "comicscript/script.hpp"

namespace comicscript {

// The two-turn description conversation: first show the labeled panel,
// then ask for a rephrase that cites the panel's script extract. Triple
// quotes inside the extract are softened to '''.
std::vector<ChatMessage> description_chain(ImageRef labeled_panel,
                                           const std::string& script_extract);

// Runs the chain; the final rephrase is the panel description.
std::string describe_panel(ChatClient& client, const std::string& vision_model,
                           ImageRef labeled_panel, const std::string& script_extract);

// Conventional file name for a panel crop: page{p}_panel{k}.png with k the
// 1-based reading-order position.
std::string panel_image_name(int page_index, int panel_number);

// Labels a panel crop with the speaker of every non-excluded character
// instance in it, mapping page coordinates into the crop. Zero instances
// return the input bytes untouched.
std::vector<std::uint8_t> overlay_panel(const std::vector<std::uint8_t>& png,
                                        const PageAnnotation& page, const Panel& panel,
                                        const ClusterAssignment& assignment,
                                        const NameMap& names);

struct DescribeOptions {
  std::vector<int> pages;  // empty = every page
};

// Produces the described script: for each panel, writes the labeled crop
// into overlays_dir and inserts the model's description into a copy of
// `named_script`. Panel crops are read from images_dir by convention.
Script describe_book(const BookAnnotation& book, const Script& named_script,
                     const ClusterAssignment& assignment, const NameMap& names,
                     const std::string& images_dir, const std::string& overlays_dir,
                     ChatClient& client, const DescribeOptions& options = {});

}  // namespace comicscript
