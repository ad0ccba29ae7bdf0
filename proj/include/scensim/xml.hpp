#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scensim/error.hpp"

namespace scensim::xml {

/// One element of a parsed document. `text` concatenates the character data
/// directly inside the element (entities decoded); structural whitespace
/// around child elements is not recorded.
struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Node> children;
    std::string text;

    const std::string* attribute(const std::string& key) const;
    const Node* child(const std::string& name) const;
    std::vector<const Node*> children_named(const std::string& name) const;
    bool has_child_elements() const { return !children.empty(); }
};

/// Parses a single-root document. Throws Error(WellFormedness) on anything
/// that is not acceptable XML for this dialect family.
Node parse(const std::string& document);

/// Renders with a two-space indent; elements holding only text are written
/// inline so that text round-trips byte-exactly.
std::string write_document(const Node& root);

std::string escape_text(const std::string& text);

} // namespace scensim::xml
