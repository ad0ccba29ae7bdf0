#include "scensim/xml.hpp"

#include <cctype>
#include <cstring>

namespace scensim::xml {

const std::string* Node::attribute(const std::string& key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

const Node* Node::child(const std::string& n) const {
    for (const auto& c : children)
        if (c.name == n) return &c;
    return nullptr;
}

std::vector<const Node*> Node::children_named(const std::string& n) const {
    std::vector<const Node*> out;
    for (const auto& c : children)
        if (c.name == n) out.push_back(&c);
    return out;
}

namespace {

[[noreturn]] void fail(const std::string& what, size_t pos) {
    throw Error(ErrorCode::WellFormedness, what + " near offset " + std::to_string(pos));
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    Node parse_document() {
        skip_prolog();
        Node root = parse_element();
        skip_misc();
        if (pos_ != s_.size()) fail("trailing content after document element", pos_);
        return root;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    bool starts_with(const char* t) const { return s_.compare(pos_, std::strlen(t), t) == 0; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void skip_comment() {
        size_t end = s_.find("-->", pos_ + 4);
        if (end == std::string::npos) fail("unterminated comment", pos_);
        pos_ = end + 3;
    }

    void skip_prolog() {
        skip_ws();
        if (starts_with("<?xml")) {
            size_t end = s_.find("?>", pos_);
            if (end == std::string::npos) fail("unterminated XML declaration", pos_);
            pos_ = end + 2;
        }
        skip_misc();
        if (eof() || peek() != '<') fail("expected document element", pos_);
    }

    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_comment();
                continue;
            }
            break;
        }
    }

    std::string read_name() {
        size_t start = pos_;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
                c == ':') {
                ++pos_;
            } else {
                break;
            }
        }
        if (pos_ == start) fail("expected name", pos_);
        return s_.substr(start, pos_ - start);
    }

    std::string decode_entities(const std::string& raw, size_t basePos) {
        std::string out;
        out.reserve(raw.size());
        for (size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                if (raw[i] == '<') fail("raw '<' in content", basePos + i);
                out += raw[i];
                continue;
            }
            size_t semi = raw.find(';', i);
            if (semi == std::string::npos) fail("unterminated entity", basePos + i);
            std::string ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "amp") out += '&';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else if (!ent.empty() && ent[0] == '#') {
                int base = 10;
                size_t digits = 1;
                if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')) {
                    base = 16;
                    digits = 2;
                }
                unsigned long cp = 0;
                try {
                    cp = std::stoul(ent.substr(digits), nullptr, base);
                } catch (...) {
                    fail("bad character reference", basePos + i);
                }
                append_utf8(out, cp, basePos + i);
            } else {
                fail("unknown entity '&" + ent + ";'", basePos + i);
            }
            i = semi;
        }
        return out;
    }

    void append_utf8(std::string& out, unsigned long cp, size_t pos) {
        if (cp <= 0x7F) {
            out += static_cast<char>(cp);
        } else if (cp <= 0x7FF) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp <= 0xFFFF) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp <= 0x10FFFF) {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            fail("character reference out of range", pos);
        }
    }

    std::string read_attr_value() {
        if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value", pos_);
        char quote = peek();
        ++pos_;
        size_t start = pos_;
        size_t end = s_.find(quote, pos_);
        if (end == std::string::npos) fail("unterminated attribute value", start);
        std::string raw = s_.substr(start, end - start);
        pos_ = end + 1;
        return decode_entities(raw, start);
    }

    Node parse_element() {
        if (eof() || peek() != '<') fail("expected element", pos_);
        ++pos_;
        Node node;
        node.name = read_name();
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated start tag", pos_);
            if (peek() == '>') {
                ++pos_;
                parse_content(node);
                return node;
            }
            if (starts_with("/>")) {
                pos_ += 2;
                return node;
            }
            std::string key = read_name();
            skip_ws();
            if (eof() || peek() != '=') fail("expected '=' after attribute name", pos_);
            ++pos_;
            skip_ws();
            std::string value = read_attr_value();
            for (const auto& [k, v] : node.attributes)
                if (k == key) fail("duplicate attribute '" + key + "'", pos_);
            node.attributes.emplace_back(key, value);
        }
    }

    void parse_content(Node& node) {
        std::string text;
        bool sawChildren = false;
        for (;;) {
            if (eof()) fail("unterminated element <" + node.name + ">", pos_);
            if (starts_with("<!--")) {
                skip_comment();
                continue;
            }
            if (starts_with("</")) {
                pos_ += 2;
                std::string closing = read_name();
                skip_ws();
                if (eof() || peek() != '>') fail("malformed end tag", pos_);
                ++pos_;
                if (closing != node.name)
                    fail("mismatched end tag </" + closing + "> for <" + node.name + ">", pos_);
                if (!sawChildren) {
                    node.text = text;
                } else {
                    // Whitespace between children is formatting; anything else is
                    // mixed content, which this dialect family does not use.
                    for (char c : text)
                        if (!std::isspace(static_cast<unsigned char>(c)))
                            fail("mixed text and elements inside <" + node.name + ">", pos_);
                }
                return;
            }
            if (peek() == '<') {
                node.children.push_back(parse_element());
                sawChildren = true;
                continue;
            }
            size_t start = pos_;
            size_t next = s_.find('<', pos_);
            if (next == std::string::npos) fail("unterminated element content", pos_);
            text += decode_entities(s_.substr(start, next - start), start);
            pos_ = next;
        }
    }
};

void write_node(std::string& out, const Node& node, int depth) {
    std::string indent(static_cast<size_t>(depth) * 2, ' ');
    out += indent;
    out += '<';
    out += node.name;
    for (const auto& [k, v] : node.attributes) {
        out += ' ';
        out += k;
        out += "=\"";
        out += escape_text(v);
        out += '"';
    }
    if (node.children.empty() && node.text.empty()) {
        out += "/>\n";
        return;
    }
    if (node.children.empty()) {
        out += '>';
        out += escape_text(node.text);
        out += "</";
        out += node.name;
        out += ">\n";
        return;
    }
    out += ">\n";
    for (const auto& c : node.children) write_node(out, c, depth + 1);
    out += indent;
    out += "</";
    out += node.name;
    out += ">\n";
}

} // namespace

Node parse(const std::string& document) {
    Parser p(document);
    return p.parse_document();
}

std::string write_document(const Node& root) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    write_node(out, root, 0);
    return out;
}

std::string escape_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace scensim::xml
