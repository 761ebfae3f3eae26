#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dtinsight/dtdf.hpp"

namespace dtinsight::store {

using dtdf::Literal;
using dtdf::QualifiedName;

inline const QualifiedName kRdfType{"rdf", "type"};

// A ground term: IRI or literal.
using Node = std::variant<QualifiedName, Literal>;

struct Variable {
    std::string name;
    auto operator<=>(const Variable&) const = default;
};

using Term = std::variant<QualifiedName, Literal, Variable>;

std::string render(const Node& n);
std::string render(const Term& t);

// Like render(), but IRIs in the model's own namespace print bare, matching
// the ids used by the constellation and the gateway.
std::string display(const Node& n, const dtdf::DescriptionModel& model);

struct Triple {
    QualifiedName subject;
    QualifiedName predicate;
    Node object;

    bool operator==(const Triple&) const = default;
};

bool operator<(const Triple& a, const Triple& b);

// Deterministic: instance order, then type, relations, scalars, desc.
std::vector<Triple> to_triples(const dtdf::DescriptionModel& model);

// Immutable fact base. Duplicate triples collapse to one (first position kept).
class TripleStore {
public:
    TripleStore() = default;
    explicit TripleStore(std::vector<Triple> triples);

    const std::vector<Triple>& triples() const { return triples_; }
    // Every distinct node in any position, in first-seen order.
    const std::vector<Node>& nodes() const { return nodes_; }
    bool contains(const Triple& t) const { return set_.count(t) > 0; }

private:
    std::vector<Triple> triples_;
    std::vector<Node> nodes_;
    std::set<Triple> set_;
};

struct TriplePattern {
    Term subject;
    Term predicate;
    Term object;
};

class QueryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Query {
    std::vector<std::string> selectVars;
    std::vector<TriplePattern> patterns;
    bool distinct = false;

    // Throws QueryError when a select variable is absent from the patterns
    // or a literal sits in subject/predicate position.
    void check() const;
};

using Binding = std::map<std::string, Node>;

// Basic graph pattern evaluation: nested loop over patterns left to right.
// Results are the projections of every distinct satisfying assignment,
// sorted by rendered values in selectVars order.
std::vector<Binding> select(const Query& query, const TripleStore& store);
std::vector<Binding> select(const Query& query, const std::vector<Triple>& triples);

// Text form: SELECT [DISTINCT] ?a ?b WHERE { ?a <p:l> ?b . ... }
// Terms may be ?var, prefix:local, <prefix:local>, "string", number,
// true/false, or a bare name. A bare name resolves to the single store IRI
// with that local part, so `?e enables what_if_sim` works without prefixes.
Query parse_query(std::string_view text, const TripleStore& store);

// {"vars":[...],"bindings":[{"var": value, ...}, ...]}. IRIs appear as
// display strings, literals as JSON booleans, numbers and strings.
std::string results_json(const Query& query, const std::vector<Binding>& rows, const dtdf::DescriptionModel& model);

// ---------------------------------------------------------------------------
// Typed accessors over a model's store.

class ModelView {
public:
    ModelView(const dtdf::DescriptionModel& model, const dtdf::Vocabulary& vocab);

    const TripleStore& store() const { return store_; }

    // Ids typed (transitively) as Service, in store order.
    std::vector<QualifiedName> services() const;
    std::vector<QualifiedName> enablers_of(const QualifiedName& service) const;
    std::vector<QualifiedName> inputs_of(const QualifiedName& enabler) const;
    // (DataTransmitted, Data) pairs from asData assertions.
    std::vector<std::pair<QualifiedName, QualifiedName>> data_links() const;

private:
    std::vector<QualifiedName> subjects_with(std::string_view forward, const QualifiedName& object) const;

    const dtdf::Vocabulary& vocab_;
    TripleStore store_;
};

}  // namespace dtinsight::store
