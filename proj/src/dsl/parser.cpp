#include <charconv>
#include <map>
#include <sstream>

#include "dtinsight/dsl.hpp"
#include "dtinsight/text.hpp"
#include "lexer.hpp"

namespace dtinsight::dsl {

using namespace dtdf;
using detail::Tok;
using detail::Token;

std::string format_diagnostic(const ParseDiagnostic& d, std::string_view source_name) {
    std::ostringstream os;
    if (!source_name.empty()) os << source_name << ':';
    os << d.span.line << ':' << d.span.column << ": error: " << d.message;
    return os.str();
}

namespace {

// Signals that the current declaration is abandoned; the caller resyncs.
struct Abandon {};

class ParserBase {
protected:
    explicit ParserBase(std::string_view source) : toks_(detail::tokenize(source)) {}

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& advance() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_word(std::string_view w) const { return at(Tok::Ident) && peek().text == w; }

    [[noreturn]] void fail(const Token& t, std::string message, std::optional<std::string> expected = {}) {
        if (t.kind == Tok::Error) message = t.text;
        diags_.push_back({t.span, std::move(message), std::move(expected)});
        throw Abandon{};
    }

    [[noreturn]] void fail_expected(std::string_view what) {
        const Token& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        fail(t, "expected " + std::string(what) + ", found " + got, std::string(what));
    }

    const Token& expect(Tok k) {
        if (!at(k)) fail_expected(detail::describe(k));
        return advance();
    }

    void expect_word(std::string_view w) {
        if (!at_word(w)) fail_expected("'" + std::string(w) + "'");
        advance();
    }

    // Skips to the next anchor keyword, end of input, or a ']' that closes
    // an enclosing block. `depth` is the number of '[' already open inside
    // the abandoned declaration.
    template <typename IsAnchor>
    void resync(int depth, IsAnchor is_anchor) {
        for (;;) {
            const Token& t = peek();
            if (t.kind == Tok::End) return;
            if (t.kind == Tok::Ident && is_anchor(t.text)) return;
            if (t.kind == Tok::LBracket) ++depth;
            if (t.kind == Tok::RBracket) {
                if (depth == 0) return;
                --depth;
            }
            advance();
        }
    }

    // Called after a diagnostic: step over the offending token, then resync.
    template <typename IsAnchor>
    void skip_after_error(int depth, bool wrapped, IsAnchor is_anchor) {
        const Token& t = peek();
        if (t.kind == Tok::LBracket) {
            ++depth;
            advance();
        } else if (t.kind == Tok::RBracket) {
            if (depth > 0) {
                --depth;
                advance();
            } else if (!wrapped) {
                advance();
            }
        } else if (t.kind != Tok::End && !(t.kind == Tok::Ident && is_anchor(t.text))) {
            advance();
        }
        resync(depth, is_anchor);
    }

    // uses <iri> as P | uses P | extends ...
    std::string parse_import() {
        advance();  // uses / extends
        if (at(Tok::Iri)) {
            std::string iri = advance().text;
            if (at_word("as")) {
                advance();
                return expect(Tok::Ident).text;
            }
            return iri;
        }
        return expect(Tok::Ident).text;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<ParseDiagnostic> diags_;
};

// ---------------------------------------------------------------------------

class DescriptionParser : ParserBase {
public:
    explicit DescriptionParser(std::string_view source) : ParserBase(source) {}

    ParseResult<DescriptionModel> run() {
        model_.name = std::string(kDefaultModelName);
        bool wrapped = false;
        try {
            if (at_word("description")) {
                advance();
                model_.name = expect(Tok::Ident).text;
                expect(Tok::LBracket);
                wrapped = true;
            }
        } catch (const Abandon&) {
            return finish();
        }
        body(wrapped);
        try {
            if (wrapped) expect(Tok::RBracket);
            if (!at(Tok::End)) fail_expected("end of input");
        } catch (const Abandon&) {
        }
        return finish();
    }

private:
    ParseResult<DescriptionModel> finish() {
        ParseResult<DescriptionModel> r;
        if (diags_.empty()) r.value = std::move(model_);
        r.diagnostics = std::move(diags_);
        return r;
    }

    static bool anchor(std::string_view w) { return w == "instance"; }

    void body(bool wrapped) {
        for (;;) {
            if (at(Tok::End) || (wrapped && at(Tok::RBracket))) return;
            try {
                if (at_word("uses") || at_word("extends")) {
                    model_.imports.push_back(parse_import());
                } else if (at_word("instance")) {
                    instance();
                } else {
                    fail_expected("'instance'");
                }
            } catch (const Abandon&) {
                skip_after_error(bracketDepth_, wrapped, anchor);
                bracketDepth_ = 0;
            }
        }
    }

    QualifiedName name_ref(const Token& t) {
        if (t.kind == Tok::QName) return QualifiedName::parse(t.text);
        return QualifiedName(model_.name, t.text);
    }

    QualifiedName expect_name(std::string_view what) {
        if (!at(Tok::Ident) && !at(Tok::QName)) fail_expected(what);
        if (at_word("instance")) fail_expected(what);
        return name_ref(advance());
    }

    void instance() {
        advance();  // 'instance'
        Instance inst;
        inst.id = expect_name("instance id");
        expect(Tok::Colon);
        inst.kind = expect_name("instance kind");
        if (at(Tok::LBracket)) {
            const Token& open = advance();
            bracketDepth_ = 1;
            for (;;) {
                if (at(Tok::RBracket)) {
                    advance();
                    bracketDepth_ = 0;
                    break;
                }
                if (at(Tok::End) || at_word("instance")) {
                    bracketDepth_ = 0;
                    fail(open, "unterminated '[' in instance '" + inst.id.local() + "'", "']'");
                }
                assertion(inst);
            }
        }
        model_.instances.push_back(std::move(inst));
    }

    void assertion(Instance& inst) {
        if (!at(Tok::QName)) fail_expected("qualified name");
        const QualifiedName key = QualifiedName::parse(advance().text);
        const Token& v = peek();
        if (key == kDescAnnotation) {
            if (v.kind != Tok::String) fail_expected("string");
            if (inst.desc) fail(v, "base:desc given more than once");
            inst.desc = advance().text;
            return;
        }
        switch (v.kind) {
        case Tok::QName:
            inst.relations.push_back({key, QualifiedName::parse(advance().text)});
            return;
        case Tok::Ident:
            if (v.text == "true" || v.text == "false") {
                inst.scalars.push_back({key, Literal{advance().text == "true"}});
            } else if (v.text == "instance") {
                fail_expected("value");
            } else {
                inst.relations.push_back({key, name_ref(advance())});
            }
            return;
        case Tok::String:
            inst.scalars.push_back({key, Literal{advance().text}});
            return;
        case Tok::Number: {
            const std::string& s = v.text;
            double d = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
            if (ec != std::errc{} || ptr != s.data() + s.size()) fail(v, "number out of range");
            advance();
            inst.scalars.push_back({key, Literal{d}});
            return;
        }
        default:
            fail_expected("value");
        }
    }

    DescriptionModel model_;
    int bracketDepth_ = 0;
};

// ---------------------------------------------------------------------------

class VocabularyParser : ParserBase {
public:
    VocabularyParser(std::string_view source, const Vocabulary& base) : ParserBase(source), base_(base) {}

    ParseResult<Vocabulary> run() {
        bool wrapped = false;
        try {
            if (at_word("vocabulary")) {
                advance();
                prefix_ = expect(Tok::Ident).text;
                expect(Tok::LBracket);
                wrapped = true;
            }
        } catch (const Abandon&) {
            return finish();
        }
        body(wrapped);
        try {
            if (wrapped) expect(Tok::RBracket);
            if (!at(Tok::End)) fail_expected("end of input");
        } catch (const Abandon&) {
        }
        return finish();
    }

private:
    static bool anchor(std::string_view w) {
        return w == "concept" || w == "aspect" || w == "relation" || w == "scalar" || w == "uses" ||
               w == "extends";
    }

    void body(bool wrapped) {
        for (;;) {
            if (at(Tok::End) || (wrapped && at(Tok::RBracket))) return;
            try {
                if (at_word("uses") || at_word("extends"))
                    parse_import();
                else if (at_word("concept") || at_word("aspect"))
                    concept_decl();
                else if (at_word("relation"))
                    relation_decl();
                else if (at_word("scalar"))
                    scalar_decl();
                else
                    fail_expected("declaration");
            } catch (const Abandon&) {
                skip_after_error(bracketDepth_, wrapped, anchor);
                bracketDepth_ = 0;
            }
        }
    }

    QualifiedName ref() {
        if (at(Tok::QName)) return QualifiedName::parse(advance().text);
        if (at(Tok::Ident)) return QualifiedName(prefix_, advance().text);
        fail_expected("name");
    }

    void concept_decl() {
        const bool aspect = peek().text == "aspect";
        advance();
        const SourceSpan span = peek().span;
        ConceptDef c{ref(), {}, aspect};
        if (at(Tok::Less)) {
            advance();
            c.parents.push_back(ref());
            while (at(Tok::Comma)) {
                advance();
                c.parents.push_back(ref());
            }
        }
        spans_[c.name] = span;
        concepts_.push_back(std::move(c));
    }

    void relation_decl() {
        advance();
        expect_word("entity");
        const SourceSpan span = peek().span;
        RelationDef r;
        r.name = ref();
        expect(Tok::LBracket);
        bracketDepth_ = 1;
        expect_word("from");
        r.domain = ref();
        expect_word("to");
        r.range = ref();
        expect_word("forward");
        r.forward = expect(Tok::Ident).text;
        expect_word("reverse");
        r.reverse = expect(Tok::Ident).text;
        expect(Tok::RBracket);
        bracketDepth_ = 0;
        spans_[r.name] = span;
        relations_.push_back(std::move(r));
    }

    void scalar_decl() {
        advance();
        expect_word("property");
        const SourceSpan span = peek().span;
        ScalarPropDef s;
        s.name = ref();
        expect(Tok::LBracket);
        bracketDepth_ = 1;
        expect_word("domain");
        s.domain = ref();
        expect_word("range");
        const Token& rangeTok = peek();
        const QualifiedName range = ref();
        static const std::map<std::string, PrimitiveKind> primitives = {
            {"boolean", PrimitiveKind::Boolean}, {"string", PrimitiveKind::String},
            {"decimal", PrimitiveKind::Number},  {"double", PrimitiveKind::Number},
            {"float", PrimitiveKind::Number},    {"integer", PrimitiveKind::Number},
            {"int", PrimitiveKind::Number},      {"number", PrimitiveKind::Number},
        };
        auto prim = primitives.find(range.local());
        bool prefixOk = range.prefix() == "xsd" || range.prefix() == prefix_;
        if (prim == primitives.end() || !prefixOk)
            fail(rangeTok, "unknown range primitive '" + rangeTok.text + "'", "boolean, string or number kind");
        s.range = prim->second;
        if (at_word("functional")) {
            advance();
            s.functional = true;
        }
        expect(Tok::RBracket);
        bracketDepth_ = 0;
        spans_[s.name] = span;
        scalars_.push_back(std::move(s));
    }

    template <typename Def, typename Find>
    void drop_identical(std::vector<Def>& defs, Find find) {
        std::vector<Def> kept;
        for (auto& d : defs) {
            if (!base_.has_name(d.name)) {
                kept.push_back(std::move(d));
                continue;
            }
            const Def* existing = find(d.name);
            if (!existing || !(*existing == d))
                diags_.push_back({spans_[d.name], "redefinition of built-in name '" + d.name.str() + "'", {}});
        }
        defs = std::move(kept);
    }

    ParseResult<Vocabulary> finish() {
        drop_identical(concepts_, [&](const QualifiedName& n) { return base_.find_concept(n); });
        drop_identical(relations_, [&](const QualifiedName& n) { return base_.find_relation(n); });
        drop_identical(scalars_, [&](const QualifiedName& n) { return base_.find_scalar(n); });

        ParseResult<Vocabulary> r;
        if (diags_.empty()) {
            for (const auto& issue : base_.check_extension(concepts_, relations_, scalars_)) {
                auto span = spans_.count(issue.name) ? spans_[issue.name] : SourceSpan{};
                diags_.push_back({span, issue.name.str() + ": " + issue.message, {}});
            }
        }
        if (diags_.empty()) r.value = base_.extend(concepts_, relations_, scalars_);
        r.diagnostics = std::move(diags_);
        return r;
    }

    const Vocabulary& base_;
    std::string prefix_{kVocabPrefix};
    int bracketDepth_ = 0;
    std::vector<ConceptDef> concepts_;
    std::vector<RelationDef> relations_;
    std::vector<ScalarPropDef> scalars_;
    std::map<QualifiedName, SourceSpan> spans_;
};

}  // namespace

ParseResult<DescriptionModel> parse_description(std::string_view source) {
    return DescriptionParser(source).run();
}

ParseResult<Vocabulary> parse_vocabulary(std::string_view source, const Vocabulary& base) {
    return VocabularyParser(source, base).run();
}

std::string serialize(const DescriptionModel& model) {
    std::ostringstream os;
    os << "description " << model.name << " [\n";
    for (const auto& imp : model.imports) {
        if (is_identifier(imp))
            os << "  uses " << imp << '\n';
        else
            os << "  uses <" << imp << ">\n";
    }
    for (const auto& inst : model.instances) {
        os << "  instance " << model.display_id(inst.id) << " : " << model.display_id(inst.kind) << " [\n";
        for (const auto& r : inst.relations)
            os << "    " << r.relation.str() << ' ' << model.display_id(r.target) << '\n';
        for (const auto& s : inst.scalars) os << "    " << s.property.str() << ' ' << render_literal(s.value) << '\n';
        if (inst.desc) os << "    " << kDescAnnotation.str() << ' ' << text::quote(*inst.desc) << '\n';
        os << "  ]\n";
    }
    os << "]\n";
    return os.str();
}

}  // namespace dtinsight::dsl
