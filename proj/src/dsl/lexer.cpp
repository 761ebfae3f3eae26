#include "lexer.hpp"

namespace dtinsight::dsl::detail {

std::string_view describe(Tok t) {
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::QName: return "qualified name";
    case Tok::Colon: return "':'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Less: return "'<'";
    case Tok::Comma: return "','";
    case Tok::String: return "string";
    case Tok::Number: return "number";
    case Tok::Iri: return "IRI";
    case Tok::Error: return "invalid token";
    case Tok::End: return "end of input";
    }
    return "?";
}

namespace {

bool ident_head(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_tail(char c) { return ident_head(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }
bool space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

void append_utf8(std::string& out, unsigned cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, {line_, col_, 0}, {}});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            if (space(peek())) {
                bump();
            } else if (peek() == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') bump();
            } else {
                return;
            }
        }
    }

    Token make(Tok kind, std::size_t start, int line, int col, std::string text) const {
        return {kind, {line, col, static_cast<int>(pos_ - start)}, std::move(text)};
    }

    Token next() {
        const std::size_t start = pos_;
        const int line = line_, col = col_;
        const char c = peek();

        if (ident_head(c)) {
            while (ident_tail(peek())) bump();
            if (peek() == ':' && ident_head(peek(1))) {
                bump();
                while (ident_tail(peek())) bump();
                return make(Tok::QName, start, line, col, std::string(src_.substr(start, pos_ - start)));
            }
            return make(Tok::Ident, start, line, col, std::string(src_.substr(start, pos_ - start)));
        }
        if (digit(c) || (c == '-' && digit(peek(1)))) {
            bump();
            while (digit(peek())) bump();
            if (peek() == '.' && digit(peek(1))) {
                bump();
                while (digit(peek())) bump();
            }
            return make(Tok::Number, start, line, col, std::string(src_.substr(start, pos_ - start)));
        }
        if (c == '"') return string_literal(start, line, col);
        if (c == '<') {
            // IRI when a '>' closes it before any whitespace
            std::size_t j = pos_ + 1;
            while (j < src_.size() && !space(src_[j]) && src_[j] != '>') ++j;
            if (j < src_.size() && src_[j] == '>' && j > pos_ + 1) {
                while (pos_ <= j) bump();
                return make(Tok::Iri, start, line, col, std::string(src_.substr(start + 1, j - start - 1)));
            }
            bump();
            return make(Tok::Less, start, line, col, "<");
        }
        switch (c) {
        case ':': bump(); return make(Tok::Colon, start, line, col, ":");
        case '[': bump(); return make(Tok::LBracket, start, line, col, "[");
        case ']': bump(); return make(Tok::RBracket, start, line, col, "]");
        case ',': bump(); return make(Tok::Comma, start, line, col, ",");
        default: break;
        }
        // stray byte; swallow the rest of a UTF-8 sequence with it
        bump();
        while (pos_ < src_.size() && (static_cast<unsigned char>(peek()) & 0xC0) == 0x80) bump();
        return make(Tok::Error, start, line, col, "unexpected character");
    }

    Token string_literal(std::size_t start, int line, int col) {
        bump();  // opening quote
        std::string value;
        std::string error;
        for (;;) {
            if (pos_ >= src_.size() || peek() == '\n') {
                return make(Tok::Error, start, line, col, "unterminated string literal");
            }
            char c = peek();
            if (c == '"') {
                bump();
                break;
            }
            if (c != '\\') {
                value += c;
                bump();
                continue;
            }
            bump();
            char e = peek();
            if (pos_ >= src_.size() || e == '\n') continue;  // reported as unterminated next round
            bump();
            switch (e) {
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case 'r': value += '\r'; break;
            case 'u': {
                unsigned cp = 0;
                int digits = 0;
                for (; digits < 4; ++digits) {
                    char h = peek();
                    unsigned v;
                    if (h >= '0' && h <= '9') v = h - '0';
                    else if (h >= 'a' && h <= 'f') v = h - 'a' + 10;
                    else if (h >= 'A' && h <= 'F') v = h - 'A' + 10;
                    else break;
                    cp = cp * 16 + v;
                    bump();
                }
                if (digits < 4 || (cp >= 0xD800 && cp <= 0xDFFF)) {
                    if (error.empty()) error = "invalid \\u escape";
                } else {
                    append_utf8(value, cp);
                }
                break;
            }
            default:
                if (error.empty()) error = std::string("invalid escape '\\") + e + "'";
            }
        }
        if (!error.empty()) return make(Tok::Error, start, line, col, error);
        return make(Tok::String, start, line, col, std::move(value));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace dtinsight::dsl::detail
