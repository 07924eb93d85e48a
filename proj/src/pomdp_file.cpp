#include "fscpomdp/pomdp_file.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace fscpomdp {

namespace {

struct Token {
    std::string text;
    int line;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ':') {
            out.push_back({":", line});
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && text[j] != ':' && text[j] != '#' &&
                   !std::isspace(static_cast<unsigned char>(text[j])))
                ++j;
            out.push_back({std::string(text.substr(i, j - i)), line});
            i = j;
        }
    }
    return out;
}

bool is_keyword(const std::string& t) {
    return t == "discount" || t == "values" || t == "states" || t == "actions" || t == "observations" ||
           t == "start" || t == "T" || t == "O" || t == "R";
}

struct Statement {
    std::string keyword;  // "start include" / "start exclude" for the list forms
    int line;
    std::vector<Token> body;  // tokens after the keyword's colon
};

std::vector<Statement> split_statements(const std::vector<Token>& toks) {
    std::vector<Statement> out;
    auto starts_statement = [&](std::size_t i) {
        if (i + 1 >= toks.size() || !is_keyword(toks[i].text)) return false;
        if (toks[i + 1].text == ":") return true;
        return toks[i].text == "start" && i + 2 < toks.size() &&
               (toks[i + 1].text == "include" || toks[i + 1].text == "exclude") && toks[i + 2].text == ":";
    };
    std::size_t i = 0;
    if (!toks.empty() && !starts_statement(0)) throw PomdpParseError("expected a statement, got '" + toks[0].text + "'", toks[0].line);
    while (i < toks.size()) {
        Statement st{toks[i].text, toks[i].line, {}};
        if (toks[i + 1].text == ":") {
            i += 2;
        } else {
            st.keyword += " " + toks[i + 1].text;
            i += 3;
        }
        while (i < toks.size() && !starts_statement(i)) st.body.push_back(toks[i++]);
        out.push_back(std::move(st));
    }
    return out;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno == 0;
}

bool parse_count(const std::string& s, std::size_t& out) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return false;
    out = std::stoul(s);
    return true;
}

double number_at(const Token& t) {
    double v;
    if (!parse_number(t.text, v)) throw PomdpParseError("expected a number, got '" + t.text + "'", t.line);
    return v;
}

class Parser {
public:
    PomdpFile run(std::string_view text) {
        const auto stmts = split_statements(tokenize(text));
        for (const auto& st : stmts) header(st);
        if (states_.empty() || actions_.empty() || observations_.empty())
            throw PomdpParseError("states, actions and observations must all be declared", 0);
        if (!have_discount_) throw PomdpParseError("missing discount", 0);

        const std::size_t ns = states_.size(), na = actions_.size(), nz = observations_.size();
        T_.assign(na, std::vector<std::vector<double>>(ns, std::vector<double>(ns, 0.0)));
        O_.assign(na, std::vector<std::vector<double>>(ns, std::vector<double>(nz, 0.0)));
        R_.assign(na * ns * ns * nz, 0.0);
        for (const auto& st : stmts) body(st);

        RawModel raw;
        raw.state_names = states_;
        raw.action_names = actions_;
        raw.observation_names = observations_;
        raw.discount = discount_;
        raw.transition = T_;
        raw.observation = O_;
        raw.reward.assign(ns, std::vector<double>(na, 0.0));
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t s = 0; s < ns; ++s) {
                double r = 0.0;
                for (std::size_t s2 = 0; s2 < ns; ++s2) {
                    if (T_[a][s][s2] == 0.0) continue;
                    double inner = 0.0;
                    for (std::size_t z = 0; z < nz; ++z) inner += O_[a][s2][z] * reward_at(a, s, s2, z);
                    r += T_[a][s][s2] * inner;
                }
                raw.reward[s][a] = cost_ ? -r : r;
            }

        PomdpFile file{validate_model(raw), std::nullopt, cost_};
        if (start_) file.start = Belief(Eigen::Map<const Eigen::VectorXd>(start_->data(), static_cast<Eigen::Index>(ns)));
        return file;
    }

private:
    double& reward_at(std::size_t a, std::size_t s, std::size_t s2, std::size_t z) {
        const std::size_t ns = states_.size(), nz = observations_.size();
        return R_[((a * ns + s) * ns + s2) * nz + z];
    }

    static std::vector<std::string> names(const Statement& st, const std::string& prefix) {
        if (st.body.empty()) throw PomdpParseError(st.keyword + ": expected a count or names", st.line);
        std::size_t n;
        if (st.body.size() == 1 && parse_count(st.body[0].text, n)) {
            if (n == 0) throw PomdpParseError(st.keyword + ": count must be positive", st.line);
            std::vector<std::string> out;
            for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
            return out;
        }
        std::vector<std::string> out;
        for (const auto& t : st.body) {
            if (t.text == ":") throw PomdpParseError(st.keyword + ": unexpected ':'", t.line);
            if (std::find(out.begin(), out.end(), t.text) != out.end())
                throw PomdpParseError(st.keyword + ": duplicate name '" + t.text + "'", t.line);
            out.push_back(t.text);
        }
        return out;
    }

    void header(const Statement& st) {
        if (st.keyword == "discount") {
            if (st.body.size() != 1) throw PomdpParseError("discount: expected one number", st.line);
            discount_ = number_at(st.body[0]);
            have_discount_ = true;
        } else if (st.keyword == "values") {
            if (st.body.size() != 1 || (st.body[0].text != "reward" && st.body[0].text != "cost"))
                throw PomdpParseError("values: expected 'reward' or 'cost'", st.line);
            cost_ = st.body[0].text == "cost";
        } else if (st.keyword == "states") {
            states_ = names(st, "s");
        } else if (st.keyword == "actions") {
            actions_ = names(st, "a");
        } else if (st.keyword == "observations") {
            observations_ = names(st, "o");
        }
    }

    // Resolves a name, index or `*` against a declared list.
    static std::vector<std::size_t> refs(const Token& t, const std::vector<std::string>& list, const char* what) {
        std::vector<std::size_t> out;
        if (t.text == "*") {
            for (std::size_t i = 0; i < list.size(); ++i) out.push_back(i);
            return out;
        }
        if (auto it = std::find(list.begin(), list.end(), t.text); it != list.end()) {
            out.push_back(static_cast<std::size_t>(it - list.begin()));
            return out;
        }
        std::size_t idx;
        if (parse_count(t.text, idx) && idx < list.size()) {
            out.push_back(idx);
            return out;
        }
        throw PomdpParseError(std::string("unknown ") + what + " '" + t.text + "'", t.line);
    }

    // Splits "x : y : z v1 v2 ..." into the colon-separated references and
    // the trailing value tokens.
    struct Entry {
        std::vector<Token> refs;
        std::vector<Token> values;
    };
    static Entry split_entry(const Statement& st, std::size_t max_refs) {
        Entry e;
        std::size_t i = 0;
        if (st.body.empty()) throw PomdpParseError(st.keyword + ": empty entry", st.line);
        e.refs.push_back(st.body[i++]);
        while (i + 1 < st.body.size() && st.body[i].text == ":" && e.refs.size() < max_refs) {
            e.refs.push_back(st.body[i + 1]);
            i += 2;
        }
        for (; i < st.body.size(); ++i) {
            if (st.body[i].text == ":") throw PomdpParseError(st.keyword + ": too many ':' separators", st.body[i].line);
            e.values.push_back(st.body[i]);
        }
        if (e.values.empty()) throw PomdpParseError(st.keyword + ": missing values", st.line);
        return e;
    }

    std::vector<double> numbers(const Statement& st, const std::vector<Token>& vals, std::size_t expected) {
        if (vals.size() != expected)
            throw PomdpParseError(st.keyword + ": expected " + std::to_string(expected) + " values, got " +
                                      std::to_string(vals.size()),
                                  vals.empty() ? st.line : vals.front().line);
        std::vector<double> out;
        out.reserve(expected);
        for (const auto& t : vals) out.push_back(number_at(t));
        return out;
    }

    bool keyword_value(const std::vector<Token>& vals, const char* word) const {
        return vals.size() == 1 && vals[0].text == word;
    }

    void body(const Statement& st) {
        const std::size_t ns = states_.size(), na = actions_.size(), nz = observations_.size();
        if (st.keyword == "T") {
            Entry e = split_entry(st, 3);
            const auto acts = refs(e.refs[0], actions_, "action");
            if (e.refs.size() == 1) {
                std::vector<double> m;
                if (keyword_value(e.values, "identity")) {
                    m.assign(ns * ns, 0.0);
                    for (std::size_t s = 0; s < ns; ++s) m[s * ns + s] = 1.0;
                } else if (keyword_value(e.values, "uniform")) {
                    m.assign(ns * ns, 1.0 / static_cast<double>(ns));
                } else {
                    m = numbers(st, e.values, ns * ns);
                }
                for (auto a : acts)
                    for (std::size_t s = 0; s < ns; ++s)
                        for (std::size_t s2 = 0; s2 < ns; ++s2) T_[a][s][s2] = m[s * ns + s2];
            } else if (e.refs.size() == 2) {
                const auto from = refs(e.refs[1], states_, "state");
                std::vector<double> row = keyword_value(e.values, "uniform")
                                              ? std::vector<double>(ns, 1.0 / static_cast<double>(ns))
                                              : numbers(st, e.values, ns);
                for (auto a : acts)
                    for (auto s : from) T_[a][s] = row;
            } else {
                const auto from = refs(e.refs[1], states_, "state");
                const auto to = refs(e.refs[2], states_, "state");
                const double p = numbers(st, e.values, 1)[0];
                for (auto a : acts)
                    for (auto s : from)
                        for (auto s2 : to) T_[a][s][s2] = p;
            }
        } else if (st.keyword == "O") {
            Entry e = split_entry(st, 3);
            const auto acts = refs(e.refs[0], actions_, "action");
            if (e.refs.size() == 1) {
                std::vector<double> m;
                if (keyword_value(e.values, "uniform")) {
                    m.assign(ns * nz, 1.0 / static_cast<double>(nz));
                } else if (keyword_value(e.values, "identity")) {
                    if (ns != nz) throw PomdpParseError("O: identity needs as many observations as states", st.line);
                    m.assign(ns * nz, 0.0);
                    for (std::size_t s = 0; s < ns; ++s) m[s * nz + s] = 1.0;
                } else {
                    m = numbers(st, e.values, ns * nz);
                }
                for (auto a : acts)
                    for (std::size_t s = 0; s < ns; ++s)
                        for (std::size_t z = 0; z < nz; ++z) O_[a][s][z] = m[s * nz + z];
            } else if (e.refs.size() == 2) {
                const auto to = refs(e.refs[1], states_, "state");
                std::vector<double> row = keyword_value(e.values, "uniform")
                                              ? std::vector<double>(nz, 1.0 / static_cast<double>(nz))
                                              : numbers(st, e.values, nz);
                for (auto a : acts)
                    for (auto s2 : to) O_[a][s2] = row;
            } else {
                const auto to = refs(e.refs[1], states_, "state");
                const auto obs = refs(e.refs[2], observations_, "observation");
                const double p = numbers(st, e.values, 1)[0];
                for (auto a : acts)
                    for (auto s2 : to)
                        for (auto z : obs) O_[a][s2][z] = p;
            }
        } else if (st.keyword == "R") {
            Entry e = split_entry(st, 4);
            const auto acts = refs(e.refs[0], actions_, "action");
            if (e.refs.size() < 2) throw PomdpParseError("R: expected at least action and start state", st.line);
            const auto from = refs(e.refs[1], states_, "state");
            if (e.refs.size() == 2) {
                const auto m = numbers(st, e.values, ns * nz);
                for (auto a : acts)
                    for (auto s : from)
                        for (std::size_t s2 = 0; s2 < ns; ++s2)
                            for (std::size_t z = 0; z < nz; ++z) reward_at(a, s, s2, z) = m[s2 * nz + z];
            } else if (e.refs.size() == 3) {
                const auto to = refs(e.refs[2], states_, "state");
                const auto row = numbers(st, e.values, nz);
                for (auto a : acts)
                    for (auto s : from)
                        for (auto s2 : to)
                            for (std::size_t z = 0; z < nz; ++z) reward_at(a, s, s2, z) = row[z];
            } else {
                const auto to = refs(e.refs[2], states_, "state");
                const auto obs = refs(e.refs[3], observations_, "observation");
                const double v = numbers(st, e.values, 1)[0];
                for (auto a : acts)
                    for (auto s : from)
                        for (auto s2 : to)
                            for (auto z : obs) reward_at(a, s, s2, z) = v;
            }
        } else if (st.keyword == "start") {
            start(st);
        } else if (st.keyword == "start include" || st.keyword == "start exclude") {
            std::vector<bool> chosen(ns, false);
            for (const auto& t : st.body)
                for (auto s : refs(t, states_, "state")) chosen[s] = true;
            if (st.keyword == "start exclude") chosen.flip();
            const auto count = static_cast<double>(std::count(chosen.begin(), chosen.end(), true));
            if (count == 0) throw PomdpParseError("start: no state left in the support", st.line);
            start_.emplace(ns, 0.0);
            for (std::size_t s = 0; s < ns; ++s)
                if (chosen[s]) (*start_)[s] = 1.0 / count;
        }
        (void)na;
    }

    void start(const Statement& st) {
        const std::size_t ns = states_.size();
        if (st.body.empty()) throw PomdpParseError("start: missing belief", st.line);
        if (keyword_value(st.body, "uniform")) {
            start_.emplace(ns, 1.0 / static_cast<double>(ns));
            return;
        }
        if (st.body.size() == ns && (ns > 1 || st.body[0].text.find('.') != std::string::npos)) {
            start_ = numbers(st, st.body, ns);
            double sum = 0.0;
            for (double p : *start_) {
                if (p < 0.0) throw ModelError("start belief has a negative entry");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRenormalizationBand) throw ModelError("start belief does not sum to 1");
            for (double& p : *start_) p /= sum;
            return;
        }
        if (st.body.size() == 1) {
            const auto s = refs(st.body[0], states_, "state");
            if (s.size() != 1) throw PomdpParseError("start: '*' is not a belief", st.line);
            start_.emplace(ns, 0.0);
            (*start_)[s[0]] = 1.0;
            return;
        }
        throw PomdpParseError("start: expected 'uniform', a state, or " + std::to_string(ns) + " probabilities", st.line);
    }

    std::vector<std::string> states_, actions_, observations_;
    double discount_ = 0.0;
    bool have_discount_ = false;
    bool cost_ = false;
    std::vector<std::vector<std::vector<double>>> T_, O_;
    std::vector<double> R_;
    std::optional<std::vector<double>> start_;
};

}  // namespace

PomdpFile parse_pomdp_file(std::string_view text) { return Parser().run(text); }

PomdpFile load_pomdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pomdp_file(ss.str());
}

}  // namespace fscpomdp
