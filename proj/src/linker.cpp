#include "bugmine/linker.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <sstream>
#include <tuple>

namespace bugmine {

namespace {

bool is_word(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

constexpr std::array closing_keywords{"close",  "closed",  "closes",  "fix",     "fixed",
                                      "fixes",  "resolve", "resolved", "resolves"};

/// True when the text before a '#' ends with a closing keyword (optionally ':').
bool keyword_before(std::string_view before)
{
    auto end = before.size();
    while (end > 0 && (std::isspace(static_cast<unsigned char>(before[end - 1])) || before[end - 1] == ':'))
        --end;
    auto begin = end;
    while (begin > 0 && std::isalpha(static_cast<unsigned char>(before[begin - 1])))
        --begin;
    if (begin == end || (begin > 0 && is_word(before[begin - 1])))
        return false;
    const auto word = lower(before.substr(begin, end - begin));
    return std::find(closing_keywords.begin(), closing_keywords.end(), word) != closing_keywords.end();
}

/// True when `between` only joins two references: ", ", " and ", " & ".
bool list_continuation(std::string_view between)
{
    std::string rest;
    for (char c : between)
        if (!std::isspace(static_cast<unsigned char>(c)) && c != ',')
            rest += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return rest.empty() || rest == "and" || rest == "&";
}

}  // namespace

IssueRefs extract_issue_refs(std::string_view msg, const RefOptions& options)
{
    IssueRefs refs;
    std::set<std::int64_t> confident;
    std::size_t last_accepted_end = std::string_view::npos;

    for (std::size_t i = 0; i < msg.size(); ++i) {
        if (msg[i] != '#')
            continue;
        std::size_t j = i + 1;
        while (j < msg.size() && std::isdigit(static_cast<unsigned char>(msg[j])))
            ++j;
        if (j == i + 1)
            continue;
        const auto digits = msg.substr(i + 1, j - i - 1);
        std::int64_t id = 0;
        bool overflow = false;
        for (char c : digits) {
            if (id > (INT64_MAX - 9) / 10) {
                overflow = true;
                break;
            }
            id = id * 10 + (c - '0');
        }
        const std::size_t hash_pos = i;
        i = j - 1;
        if (overflow || id <= 0)
            continue;

        // Classify what precedes the '#'.
        bool low = false;
        if (hash_pos > 0 && is_word(msg[hash_pos - 1])) {
            auto b = hash_pos;
            while (b > 0 && !std::isspace(static_cast<unsigned char>(msg[b - 1])))
                --b;
            auto word = msg.substr(b, hash_pos - b);
            if (word.find('/') != std::string_view::npos) {
                refs.foreign.emplace_back(msg.substr(b, j - b));
                continue;
            }
            low = true;
        }

        if (options.keyword_only) {
            const bool keyed = keyword_before(msg.substr(0, hash_pos));
            const bool chained = last_accepted_end != std::string_view::npos &&
                                 list_continuation(msg.substr(last_accepted_end, hash_pos - last_accepted_end));
            if (!keyed && !chained)
                continue;
        }
        last_accepted_end = j;
        refs.ids.insert(id);
        if (low)
            refs.low_confidence.insert(id);
        else
            confident.insert(id);
    }
    for (auto id : confident)
        refs.low_confidence.erase(id);
    return refs;
}

// ---- history

History::History(const ProjectSnapshot& snapshot)
{
    const auto* c = snapshot.commit(snapshot.head());
    while (c) {
        chain_.push_back(c->hash);
        c = c->parents.empty() ? nullptr : snapshot.commit(c->parents.front());
    }
    std::reverse(chain_.begin(), chain_.end());
    for (std::size_t i = 0; i < chain_.size(); ++i) {
        position_.emplace(chain_[i], i);
        on_chain_.insert(chain_[i]);
    }
    // Side-branch commits take the position of the earliest chain commit that reaches them.
    for (std::size_t i = 0; i < chain_.size(); ++i) {
        const auto* top = snapshot.commit(chain_[i]);
        std::deque<std::string> queue(top->parents.begin() + (top->parents.empty() ? 0 : 1), top->parents.end());
        while (!queue.empty()) {
            auto h = std::move(queue.front());
            queue.pop_front();
            if (position_.count(h))
                continue;
            const auto* pc = snapshot.commit(h);
            if (!pc)
                continue;  // external parent
            position_.emplace(h, i);
            for (const auto& p : pc->parents)
                queue.push_back(p);
        }
    }
}

std::optional<std::size_t> History::position(const std::string& hash) const
{
    auto it = position_.find(hash);
    if (it == position_.end())
        return std::nullopt;
    return it->second;
}

bool History::on_chain(const std::string& hash) const
{
    return on_chain_.count(hash) > 0;
}

// ---- timelines

BugFixTimeline build_timeline(const IssueRecord& issue, const ProjectSnapshot& snapshot, const History& history)
{
    BugFixTimeline t;
    t.issue_id = issue.id;

    std::set<std::string> candidates;
    for (const auto& f : issue.fixing_commits)
        candidates.insert(f.hash);
    for (const auto& c : snapshot.commits())
        if (extract_issue_refs(c.message).ids.count(issue.id))
            candidates.insert(c.hash);

    struct Fix {
        std::size_t pos;
        bool chain;
        Timestamp when;
        std::string hash;
    };
    std::vector<Fix> fixes;
    for (const auto& h : candidates) {
        const auto* c = snapshot.commit(h);
        auto pos = history.position(h);
        if (!c || !pos) {
            t.missing.push_back(h);
            continue;
        }
        fixes.push_back({*pos, history.on_chain(h), c->timestamp, h});
    }
    // Side-branch fixes sort before the merge that brings them in.
    std::sort(fixes.begin(), fixes.end(), [](const Fix& a, const Fix& b) {
        return std::tie(a.pos, a.chain, a.when, a.hash) < std::tie(b.pos, b.chain, b.when, b.hash);
    });
    for (const auto& f : fixes)
        t.green.push_back(f.hash);

    if (!t.missing.empty()) {
        t.degraded = true;
        t.note = fmt::format("fixing commit(s) not available: {}", fmt::join(t.missing, ", "));
    }
    if (fixes.empty()) {
        t.degraded = true;
        if (t.note.empty())
            t.note = "no fixing commit";
        return t;
    }
    const auto first = fixes.front().pos;
    const auto last = fixes.back().pos;
    if (first == 0) {
        t.degraded = true;
        t.note = fmt::format("first fixing commit {} has no parent on the history", fixes.front().hash);
        return t;
    }
    const auto& chain = history.chain();
    const auto orange_pos = first - 1;
    t.orange = chain[orange_pos];

    const std::set<std::string> green_set(t.green.begin(), t.green.end());
    for (auto p = first + 1; p < last; ++p)
        if (!green_set.count(chain[p]))
            t.gray.push_back(chain[p]);

    auto start = orange_pos;
    for (std::size_t p = 0; p <= orange_pos; ++p) {
        if (snapshot.commit(chain[p])->timestamp >= issue.created_at) {
            start = p;
            break;
        }
    }
    for (auto p = start; p <= orange_pos; ++p)
        t.blue.push_back(chain[p]);
    return t;
}

BugFixTimeline build_timeline(const IssueRecord& issue, const ProjectSnapshot& snapshot)
{
    return build_timeline(issue, snapshot, History(snapshot));
}

std::vector<BugFixTimeline> build_timelines(const ProjectSnapshot& snapshot)
{
    const History history(snapshot);
    std::vector<BugFixTimeline> out;
    for (const auto& issue : snapshot.issues())
        if (issue.state == IssueState::closed)
            out.push_back(build_timeline(issue, snapshot, history));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.issue_id < b.issue_id; });
    return out;
}

// ---- plan

bool AnalysisPlan::contains(const std::string& hash) const
{
    return std::any_of(commits.begin(), commits.end(), [&](const PlannedCommit& c) { return c.hash == hash; });
}

AnalysisPlan select_analysis_commits(const std::vector<BugFixTimeline>& timelines, const History* history)
{
    std::vector<std::string> order;
    std::map<std::string, bool> full;
    auto add = [&](const std::string& h, bool is_full) {
        auto [it, fresh] = full.emplace(h, is_full);
        if (fresh)
            order.push_back(h);
        else
            it->second = it->second || is_full;
    };
    for (const auto& t : timelines) {
        if (t.degraded)
            continue;
        add(t.orange, true);
        for (std::size_t i = 0; i < t.green.size(); ++i)
            add(t.green[i], i + 1 == t.green.size());
    }
    if (history) {
        std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
            auto pa = history->position(a).value_or(SIZE_MAX);
            auto pb = history->position(b).value_or(SIZE_MAX);
            if (pa != pb)
                return pa < pb;
            return !history->on_chain(a) && history->on_chain(b);
        });
    }
    AnalysisPlan plan;
    for (const auto& h : order)
        plan.commits.push_back({h, full[h]});
    return plan;
}

std::string plan_to_text(const AnalysisPlan& plan)
{
    std::string out;
    for (const auto& c : plan.commits)
        out += fmt::format("{} {}\n", c.hash, c.full_analysis ? "full" : "pos");
    return out;
}

AnalysisPlan plan_from_text(std::string_view text)
{
    AnalysisPlan plan;
    int n = 0;
    for (const auto& line : split_lines(text)) {
        ++n;
        if (line.empty())
            continue;
        std::istringstream in(line);
        std::string hash, mode, extra;
        in >> hash >> mode;
        if (!is_hex_hash(hash) || (mode != "full" && mode != "pos") || (in >> extra))
            throw ParseError(fmt::format("plan line {}: expected '<hash> full|pos', got '{}'", n, line));
        plan.commits.push_back({hash, mode == "full"});
    }
    return plan;
}

}  // namespace bugmine
