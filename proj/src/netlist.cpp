#include "thermoflow/netlist.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "thermoflow/errors.hpp"

namespace thermoflow::netlist {

namespace {

constexpr std::string_view kHeader = "* thermoflow netlist v1 ";
constexpr std::string_view kHashTag = " hash=";

void require_spice(const std::string& format) {
    if (format != "spice") throw DomainError("unsupported netlist format '" + format + "'");
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_number(std::string_view token, std::size_t line_no) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw DomainError("netlist line " + std::to_string(line_no) + ": bad number '" + std::string(token) + "'");
    }
    return value;
}

}  // namespace

std::string format_number(double value) {
    if (!std::isfinite(value)) throw DomainError("netlist values must be finite");
    return fmt::format("{}", value);
}

std::string card_line(const Card& card) {
    if (card.type == 'R') {
        return fmt::format("R{} {} {} {}", card.name, card.node_pos, card.node_neg, format_number(card.value));
    }
    if (card.type == 'V') {
        return fmt::format("V{} {} {} DC {}", card.name, card.node_pos, card.node_neg, format_number(card.value));
    }
    throw DomainError(std::string("unsupported card type '") + card.type + "'");
}

std::string to_text(const Netlist& netlist) {
    std::string body;
    for (const auto& card : netlist.cards) {
        body += card_line(card);
        body += '\n';
    }
    std::string out;
    out += kHeader;
    out += netlist.title;
    out += kHashTag;
    out += hex64(fnv1a(body));
    out += '\n';
    out += body;
    out += ".end\n";
    return out;
}

Netlist parse(std::string_view text) {
    Netlist out;
    std::string body;
    std::string declared_hash;
    bool ended = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;

        if (line_no == 1) {
            const auto tag = line.rfind(kHashTag);
            if (line.substr(0, kHeader.size()) != kHeader || tag == std::string_view::npos || tag < kHeader.size()) {
                throw DomainError("netlist line 1: missing thermoflow header");
            }
            out.title = std::string(line.substr(kHeader.size(), tag - kHeader.size()));
            declared_hash = std::string(line.substr(tag + kHashTag.size()));
            continue;
        }
        if (ended) {
            if (!line.empty()) throw DomainError("netlist line " + std::to_string(line_no) + ": text after .end");
            continue;
        }
        if (line == ".end") {
            ended = true;
            continue;
        }
        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0].size() < 2) {
            throw DomainError("netlist line " + std::to_string(line_no) + ": malformed card");
        }
        Card card;
        card.type = tokens[0][0];
        card.name = std::string(tokens[0].substr(1));
        if (card.type == 'R' && tokens.size() == 4) {
            card.value = parse_number(tokens[3], line_no);
        } else if (card.type == 'V' && tokens.size() == 5 && tokens[3] == "DC") {
            card.value = parse_number(tokens[4], line_no);
        } else {
            throw DomainError("netlist line " + std::to_string(line_no) + ": unsupported card '" + std::string(line) + "'");
        }
        card.node_pos = std::string(tokens[1]);
        card.node_neg = std::string(tokens[2]);
        body += std::string(line);
        body += '\n';
        out.cards.push_back(std::move(card));
    }
    if (line_no == 0) throw DomainError("empty netlist");
    if (!ended) throw DomainError("netlist is missing .end");
    if (hex64(fnv1a(body)) != declared_hash) throw DomainError("netlist hash mismatch");
    return out;
}

Netlist from_star(const circuit::StarCircuit& star) {
    // Validates resistances as a side effect.
    (void)circuit::star_node_potential(star);
    Netlist out;
    out.title = fmt::format("star n={}", star.resistances.size());
    const auto terminal = [&](std::size_t i) { return star.terminals.empty() ? i : star.terminals[i]; };
    for (std::size_t i = 0; i < star.resistances.size(); ++i) {
        out.cards.push_back({'R', std::to_string(i), fmt::format("n_res{}", terminal(i)), "n_center", star.resistances[i]});
    }
    for (std::size_t i = 0; i < star.potentials.size(); ++i) {
        out.cards.push_back({'V', std::to_string(i), fmt::format("n_res{}", terminal(i)), "0", star.potentials[i]});
    }
    return out;
}

Netlist from_crossbar(const circuit::CrossbarCircuit& xb) {
    using circuit::BranchState;
    Netlist out;
    out.title = fmt::format("crossbar K={} n+1={}", xb.mode_count(), xb.reservoir_count());
    for (std::size_t j = 0; j < xb.reservoir_count(); ++j) {
        out.cards.push_back({'V', fmt::format("C_{}", j), fmt::format("c_{}", j), "0", xb.bar_potentials[j]});
    }
    for (std::size_t k = 0; k < xb.mode_count(); ++k) {
        for (std::size_t j = 0; j < xb.reservoir_count(); ++j) {
            const auto state = xb.state(k, j);
            if (state == BranchState::Absent || state == BranchState::Open) continue;
            const auto junction = fmt::format("x_{}_{}", k, j);
            out.cards.push_back({'R', fmt::format("S_{}_{}", k, j), fmt::format("c_{}", j), junction,
                                 xb.series_resistors(k, j)});
            out.cards.push_back({'R', fmt::format("B_{}_{}", k, j), junction, fmt::format("b_{}", k),
                                 1.0 / xb.conductances(k, j)});
        }
    }
    return out;
}

std::string export_netlist(const circuit::StarCircuit& star, const std::string& format) {
    require_spice(format);
    return to_text(from_star(star));
}

std::string export_netlist(const circuit::CrossbarCircuit& crossbar, const std::string& format) {
    require_spice(format);
    return to_text(from_crossbar(crossbar));
}

}  // namespace thermoflow::netlist
