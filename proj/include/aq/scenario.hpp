#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "aq/errors.hpp"

namespace aq {

// Measurement scenario: n parties, party k has inputs[k] settings and
// outputs[k] possible outcomes. Output label 0 is the outcome omitted in the
// Collins-Gisin basis.
struct Scenario {
    int num_parties = 0;
    std::vector<int> inputs;
    std::vector<int> outputs;

    Scenario() = default;
    Scenario(std::vector<int> m, std::vector<int> d)
        : num_parties(static_cast<int>(m.size())), inputs(std::move(m)), outputs(std::move(d)) {
        if (num_parties < 1 || outputs.size() != inputs.size())
            throw structural_error("scenario: party count / list length mismatch");
        for (int v : inputs)
            if (v < 1) throw structural_error("scenario: every party needs >= 1 input");
        for (int v : outputs)
            if (v < 2) throw structural_error("scenario: every party needs >= 2 outputs");
    }

    std::size_t input_tuples() const {
        std::size_t t = 1;
        for (int v : inputs) t *= static_cast<std::size_t>(v);
        return t;
    }
    std::size_t output_tuples() const {
        std::size_t t = 1;
        for (int v : outputs) t *= static_cast<std::size_t>(v);
        return t;
    }
    std::size_t table_size() const { return input_tuples() * output_tuples(); }

    bool operator==(const Scenario& o) const {
        return inputs == o.inputs && outputs == o.outputs;
    }
};

// One party's contribution to an event.
struct Assignment {
    int party = 0;
    int input = 0;
    int output = 0;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Partial assignment of (input, output) pairs to a subset of parties.
// The empty event is the null event phi. Parts are kept sorted by party.
class Event {
  public:
    Event() = default;
    explicit Event(std::vector<Assignment> parts) : parts_(std::move(parts)) {
        std::sort(parts_.begin(), parts_.end(),
                  [](const Assignment& a, const Assignment& b) { return a.party < b.party; });
        for (std::size_t i = 1; i < parts_.size(); ++i)
            if (parts_[i].party == parts_[i - 1].party)
                throw structural_error("event: duplicate party");
    }

    bool empty() const { return parts_.empty(); }
    std::size_t size() const { return parts_.size(); }
    const std::vector<Assignment>& parts() const { return parts_; }

    const Assignment* find(int party) const {
        for (const auto& p : parts_)
            if (p.party == party) return &p;
        return nullptr;
    }

    Event without(int party) const {
        std::vector<Assignment> rest;
        rest.reserve(parts_.size());
        for (const auto& p : parts_)
            if (p.party != party) rest.push_back(p);
        return Event(std::move(rest));
    }

    void check_in(const Scenario& sc) const {
        for (const auto& p : parts_) {
            if (p.party < 0 || p.party >= sc.num_parties)
                throw structural_error("event: party out of range");
            if (p.input < 0 || p.input >= sc.inputs[p.party])
                throw structural_error("event: input out of range");
            if (p.output < 0 || p.output >= sc.outputs[p.party])
                throw structural_error("event: output out of range");
        }
    }

    // Canonical text form, parties ascending: "0:1:1;1:0:1", phi -> "phi".
    std::string str() const {
        if (parts_.empty()) return "phi";
        std::ostringstream os;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i) os << ';';
            os << parts_[i].party << ':' << parts_[i].input << ':' << parts_[i].output;
        }
        return os.str();
    }

    friend bool operator==(const Event&, const Event&) = default;

    // Order: party count, then party set, then inputs, then outputs
    // (all lexicographic). Matches the enumeration order within levels.
    friend bool operator<(const Event& a, const Event& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a.parts_[i].party != b.parts_[i].party)
                return a.parts_[i].party < b.parts_[i].party;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a.parts_[i].input != b.parts_[i].input)
                return a.parts_[i].input < b.parts_[i].input;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a.parts_[i].output != b.parts_[i].output)
                return a.parts_[i].output < b.parts_[i].output;
        return false;
    }
    friend bool operator<=(const Event& a, const Event& b) { return a == b || a < b; }

  private:
    std::vector<Assignment> parts_;
};

// True iff a common party uses the same input and obtains different outputs.
inline bool locally_orthogonal(const Event& e1, const Event& e2) {
    for (const auto& p : e1.parts()) {
        const Assignment* q = e2.find(p.party);
        if (q && q->input == p.input && q->output != p.output) return true;
    }
    return false;
}

enum class Level { AlmostQuantum, Q1 };

inline const char* level_name(Level l) {
    return l == Level::AlmostQuantum ? "aq" : "q1";
}

namespace detail {

inline void enumerate_subset_events(const Scenario& sc, const std::vector<int>& subset,
                                    std::vector<Event>& out) {
    const int k = static_cast<int>(subset.size());
    // inputs outer loop (lexicographic, first party slowest), outputs inner
    std::vector<int> xs(k, 0);
    while (true) {
        std::vector<int> as(k, 1);
        while (true) {
            std::vector<Assignment> parts(k);
            for (int i = 0; i < k; ++i) parts[i] = {subset[i], xs[i], as[i]};
            out.push_back(Event(std::move(parts)));
            int i = k - 1;
            while (i >= 0 && ++as[i] == sc.outputs[subset[i]]) as[i--] = 1;
            if (i < 0) break;
        }
        int i = k - 1;
        while (i >= 0 && ++xs[i] == sc.inputs[subset[i]]) xs[i--] = 0;
        if (i < 0) break;
    }
}

} // namespace detail

// All events with nonzero outputs at the given hierarchy level, phi first,
// grouped by party subset (ordered by size then lexicographically); within a
// subset ordered lexicographically by inputs then outputs. AlmostQuantum uses
// all nonempty subsets, Q1 the singletons only.
inline std::vector<Event> enumerate_events(const Scenario& sc, Level level) {
    std::vector<std::vector<int>> subsets;
    const int n = sc.num_parties;
    const int max_size = (level == Level::Q1) ? 1 : n;
    for (int size = 1; size <= max_size; ++size) {
        std::vector<int> pick(size);
        std::iota(pick.begin(), pick.end(), 0);
        while (true) {
            subsets.push_back(pick);
            int i = size - 1;
            while (i >= 0 && pick[i] == n - size + i) --i;
            if (i < 0) break;
            ++pick[i];
            for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    std::vector<Event> out;
    out.push_back(Event{});
    for (const auto& s : subsets) detail::enumerate_subset_events(sc, s, out);
    return out;
}

} // namespace aq
