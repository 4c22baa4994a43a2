// SPICE-compatible text form of star and crossbar circuits
//
// Grammar (one item per line, '\n' line endings):
//
//   * thermoflow netlist v1 <title> hash=<16 lowercase hex digits>
//   R<name> <node+> <node-> <ohms>
//   V<name> <node+> <node-> DC <volts>
//   .end
//
// Numbers use the shortest decimal form that round-trips to the same double. The hash
// is 64-bit FNV-1a over every card line (each followed by '\n').
//
// Node names. Star: centre n_center, wire ends n_res<j>, ground 0; cards R<i> (wire
// resistors) then V<i> (wire sources). Crossbar: reservoir bars c_<j>, mode bars b_<k>,
// junctions x_<k>_<j>; cards VC_<j> (bar sources), then per branch RS_<k>_<j> (series
// resistor c_<j> -> x_<k>_<j>) and RB_<k>_<j> (link resistor x_<k>_<j> -> b_<k>, 1/gamma).
// Absent and open branches are not emitted.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "thermoflow/circuit.hpp"
#include "thermoflow/hash.hpp"

namespace thermoflow::netlist {

struct Card {
    char type{'R'};  // 'R' or 'V'
    std::string name;  // without the type letter
    std::string node_pos;
    std::string node_neg;
    double value{0.0};

    bool operator==(const Card&) const = default;
};

struct Netlist {
    std::string title;
    std::vector<Card> cards;
};

std::string format_number(double value);
std::string card_line(const Card& card);

std::string to_text(const Netlist& netlist);

// Parses the subset above. Throws DomainError on grammar violations or a hash mismatch.
Netlist parse(std::string_view text);

Netlist from_star(const circuit::StarCircuit& star);
Netlist from_crossbar(const circuit::CrossbarCircuit& crossbar);

// format must be "spice".
std::string export_netlist(const circuit::StarCircuit& star, const std::string& format = "spice");
std::string export_netlist(const circuit::CrossbarCircuit& crossbar, const std::string& format = "spice");

}  // namespace thermoflow::netlist
