#include "dtinsight/store.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <json.hpp>

#include "dtinsight/text.hpp"

namespace dtinsight::store {

std::string render(const Node& n) {
    if (const auto* q = std::get_if<QualifiedName>(&n)) return q->str();
    return dtdf::render_literal(std::get<Literal>(n));
}

std::string render(const Term& t) {
    if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
    if (const auto* q = std::get_if<QualifiedName>(&t)) return q->str();
    return dtdf::render_literal(std::get<Literal>(t));
}

std::string display(const Node& n, const dtdf::DescriptionModel& model) {
    if (const auto* q = std::get_if<QualifiedName>(&n)) return model.display_id(*q);
    return dtdf::render_literal(std::get<Literal>(n));
}

bool operator<(const Triple& a, const Triple& b) {
    if (a.subject != b.subject) return a.subject < b.subject;
    if (a.predicate != b.predicate) return a.predicate < b.predicate;
    return a.object < b.object;
}

std::vector<Triple> to_triples(const dtdf::DescriptionModel& model) {
    std::vector<Triple> out;
    for (const auto& inst : model.instances) {
        out.push_back({inst.id, kRdfType, inst.kind});
        for (const auto& r : inst.relations) out.push_back({inst.id, r.relation, r.target});
        for (const auto& s : inst.scalars) out.push_back({inst.id, s.property, s.value});
        if (inst.desc) out.push_back({inst.id, dtdf::kDescAnnotation, Literal{*inst.desc}});
    }
    return out;
}

TripleStore::TripleStore(std::vector<Triple> triples) {
    std::set<Node> seen;
    auto note = [&](const Node& n) {
        if (seen.insert(n).second) nodes_.push_back(n);
    };
    for (auto& t : triples) {
        if (!set_.insert(t).second) continue;
        note(t.subject);
        note(t.predicate);
        note(t.object);
        triples_.push_back(std::move(t));
    }
}

// ---------------------------------------------------------------------------

namespace {

void collect_vars(const Term& t, std::vector<std::string>& out) {
    if (const auto* v = std::get_if<Variable>(&t))
        if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
}

std::vector<std::string> pattern_vars(const Query& q) {
    std::vector<std::string> vars;
    for (const auto& p : q.patterns) {
        collect_vars(p.subject, vars);
        collect_vars(p.predicate, vars);
        collect_vars(p.object, vars);
    }
    return vars;
}

// Unifies one pattern position with a ground node, extending `b`.
bool unify(const Term& term, const Node& node, Binding& b) {
    if (const auto* v = std::get_if<Variable>(&term)) {
        auto [it, inserted] = b.emplace(v->name, node);
        return inserted || it->second == node;
    }
    if (const auto* q = std::get_if<QualifiedName>(&term)) {
        const auto* nq = std::get_if<QualifiedName>(&node);
        return nq && *nq == *q;
    }
    const auto* nl = std::get_if<Literal>(&node);
    return nl && *nl == std::get<Literal>(term);
}

}  // namespace

void Query::check() const {
    auto vars = pattern_vars(*this);
    for (const auto& v : selectVars) {
        if (!dtdf::is_identifier(v)) throw QueryError("invalid variable name '?" + v + "'");
        if (std::find(vars.begin(), vars.end(), v) == vars.end())
            throw QueryError("select variable ?" + v + " does not occur in any pattern");
    }
    for (const auto& p : patterns) {
        if (std::holds_alternative<Literal>(p.subject)) throw QueryError("literal in subject position");
        if (std::holds_alternative<Literal>(p.predicate)) throw QueryError("literal in predicate position");
    }
}

std::vector<Binding> select(const Query& query, const TripleStore& store) {
    query.check();
    std::vector<Binding> results;
    Binding current;

    std::function<void(std::size_t)> solve = [&](std::size_t i) {
        if (i == query.patterns.size()) {
            Binding projected;
            for (const auto& v : query.selectVars) projected.emplace(v, current.at(v));
            results.push_back(std::move(projected));
            return;
        }
        const auto& p = query.patterns[i];
        for (const auto& t : store.triples()) {
            Binding saved = current;
            if (unify(p.subject, t.subject, current) && unify(p.predicate, t.predicate, current) &&
                unify(p.object, t.object, current))
                solve(i + 1);
            current = std::move(saved);
        }
    };
    solve(0);

    std::vector<std::pair<std::vector<std::string>, Binding>> keyed;
    keyed.reserve(results.size());
    for (auto& b : results) {
        std::vector<std::string> key;
        for (const auto& v : query.selectVars) key.push_back(render(b.at(v)));
        keyed.emplace_back(std::move(key), std::move(b));
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (query.distinct)
        keyed.erase(std::unique(keyed.begin(), keyed.end(),
                                [](const auto& a, const auto& b) { return a.second == b.second; }),
                    keyed.end());
    std::vector<Binding> out;
    out.reserve(keyed.size());
    for (auto& [k, b] : keyed) out.push_back(std::move(b));
    return out;
}

std::vector<Binding> select(const Query& query, const std::vector<Triple>& triples) {
    return select(query, TripleStore(triples));
}

// ---------------------------------------------------------------------------

namespace {

class QueryParser {
public:
    QueryParser(std::string_view text, const TripleStore& store) : s_(text), store_(store) {}

    Query run() {
        Query q;
        keyword("SELECT");
        skip_ws();
        if (try_keyword("DISTINCT")) q.distinct = true;
        bool star = false;
        skip_ws();
        if (peek() == '*') {
            ++pos_;
            star = true;
        } else {
            while (skip_ws(), peek() == '?' || peek() == '$') q.selectVars.push_back(variable_name());
        }
        keyword("WHERE");
        expect('{');
        for (;;) {
            skip_ws();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            TriplePattern p;
            p.subject = term(false);
            p.predicate = term(true);
            p.object = term(false);
            q.patterns.push_back(std::move(p));
            skip_ws();
            if (peek() == '.') ++pos_;
        }
        skip_ws();
        if (pos_ != s_.size()) error("unexpected text after '}'");
        if (star) q.selectVars = pattern_vars(q);
        q.check();
        return q;
    }

private:
    [[noreturn]] void error(const std::string& msg) const {
        throw QueryError("query: " + msg + " at offset " + std::to_string(pos_));
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    static bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    std::string word() {
        std::size_t start = pos_;
        while (word_char(peek())) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    bool try_keyword(std::string_view kw) {
        skip_ws();
        std::size_t save = pos_;
        std::string w = word();
        std::string upper;
        for (char c : w) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (upper == kw) return true;
        pos_ = save;
        return false;
    }

    void keyword(std::string_view kw) {
        if (!try_keyword(kw)) error("expected " + std::string(kw));
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) error(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string variable_name() {
        ++pos_;  // ? or $
        std::string name = word();
        if (!dtdf::is_identifier(name)) error("invalid variable name");
        return name;
    }

    Term term(bool predicatePosition) {
        skip_ws();
        char c = peek();
        if (c == '?' || c == '$') return Variable{variable_name()};
        if (c == '<') {
            std::size_t close = s_.find('>', pos_);
            if (close == std::string_view::npos) error("unterminated <...>");
            auto inner = s_.substr(pos_ + 1, close - pos_ - 1);
            pos_ = close + 1;
            return qualified(inner);
        }
        if (c == '"') return Literal{string_literal()};
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') return Literal{number()};
        if (!word_char(c)) error("expected a term");
        std::string w = word();
        if (peek() == ':') {
            ++pos_;
            std::string local = word();
            return qualified(w + ":" + local);
        }
        if (w == "true" || w == "false") return Literal{w == "true"};
        if (w == "a" && predicatePosition) return kRdfType;
        return resolve_bare(w);
    }

    QualifiedName qualified(std::string_view text) const {
        try {
            return QualifiedName::parse(text);
        } catch (const std::invalid_argument& e) {
            error(e.what());
        }
    }

    QualifiedName resolve_bare(const std::string& local) const {
        std::vector<QualifiedName> matches;
        for (const auto& n : store_.nodes())
            if (const auto* q = std::get_if<QualifiedName>(&n); q && q->local() == local) matches.push_back(*q);
        if (matches.size() > 1) {
            std::string names;
            for (const auto& m : matches) names += " " + m.str();
            error("ambiguous name '" + local + "' (candidates:" + names + ")");
        }
        if (matches.empty()) {
            if (!dtdf::is_identifier(local)) error("invalid name '" + local + "'");
            return QualifiedName("unresolved", local);  // matches nothing
        }
        return matches.front();
    }

    std::string string_literal() {
        ++pos_;
        std::string out;
        for (;;) {
            if (pos_ >= s_.size()) error("unterminated string");
            char c = s_[pos_++];
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (pos_ >= s_.size()) error("unterminated string");
            char e = s_[pos_++];
            switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            default: out += e;
            }
        }
    }

    double number() {
        std::size_t start = pos_;
        if (peek() == '-') ++pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (peek() == '.' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        std::string text(s_.substr(start, pos_ - start));
        if (text == "-") error("expected a number");
        return std::stod(text);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    const TripleStore& store_;
};

}  // namespace

Query parse_query(std::string_view text, const TripleStore& store) { return QueryParser(text, store).run(); }

// ---------------------------------------------------------------------------

ModelView::ModelView(const dtdf::DescriptionModel& model, const dtdf::Vocabulary& vocab)
    : vocab_(vocab), store_(to_triples(model)) {}

std::vector<QualifiedName> ModelView::services() const {
    const auto service = dtdf::vocab_name("Service");
    std::vector<QualifiedName> out;
    for (const auto& t : store_.triples()) {
        if (t.predicate != kRdfType) continue;
        const auto* kind = std::get_if<QualifiedName>(&t.object);
        if (kind && vocab_.specializes(*kind, service) &&
            std::find(out.begin(), out.end(), t.subject) == out.end())
            out.push_back(t.subject);
    }
    return out;
}

std::vector<QualifiedName> ModelView::subjects_with(std::string_view relationLocal,
                                                    const QualifiedName& object) const {
    const auto* wanted = vocab_.find_relation(dtdf::vocab_name(relationLocal));
    std::vector<QualifiedName> out;
    for (const auto& t : store_.triples()) {
        if (vocab_.find_relation_by_forward(t.predicate) != wanted || wanted == nullptr) continue;
        const auto* obj = std::get_if<QualifiedName>(&t.object);
        if (obj && *obj == object && std::find(out.begin(), out.end(), t.subject) == out.end())
            out.push_back(t.subject);
    }
    return out;
}

std::vector<QualifiedName> ModelView::enablers_of(const QualifiedName& service) const {
    return subjects_with("Enables", service);
}

std::vector<QualifiedName> ModelView::inputs_of(const QualifiedName& enabler) const {
    return subjects_with("InputTo", enabler);
}

std::vector<std::pair<QualifiedName, QualifiedName>> ModelView::data_links() const {
    const auto* dataInput = vocab_.find_relation(dtdf::vocab_name("DataInput"));
    std::vector<std::pair<QualifiedName, QualifiedName>> out;
    for (const auto& t : store_.triples()) {
        if (dataInput == nullptr || vocab_.find_relation_by_forward(t.predicate) != dataInput) continue;
        if (const auto* obj = std::get_if<QualifiedName>(&t.object)) out.emplace_back(t.subject, *obj);
    }
    return out;
}

std::string results_json(const Query& query, const std::vector<Binding>& rows, const dtdf::DescriptionModel& model) {
    nlohmann::ordered_json doc;
    doc["vars"] = query.selectVars;
    auto& out = doc["bindings"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (const auto& v : query.selectVars) {
            const Node& n = row.at(v);
            if (const auto* q = std::get_if<QualifiedName>(&n)) {
                obj[v] = model.display_id(*q);
                continue;
            }
            std::visit([&](const auto& lit) { obj[v] = lit; }, std::get<Literal>(n));
        }
        out.push_back(std::move(obj));
    }
    return doc.dump();
}

}  // namespace dtinsight::store
