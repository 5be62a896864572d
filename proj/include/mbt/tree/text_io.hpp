#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mbt/tree/medblocktree.hpp"

namespace mbt::tree {

// Line-oriented export. One header, one group line, then one line per block
// in (branch, seq) order:
//
//   medblocktree-text 1
//   group <name> <p> <q> <g>
//   block <branch> <seq> <origin|-> <pre_hash> <h> <zeta> <patient_pk> <doctor_pk>
//         <timestamp_ms> <keywords> <meta_id> <proposer_pk> <vrf> <round>
//
// Integers are decimal; group elements, scalars, keywords and the vrf
// encoding are lowercase hex of their fixed-width encodings ("-" for empty
// keywords). Origins are written "<branch>.<seq>".
inline constexpr std::string_view kTextMagic = "medblocktree-text";
inline constexpr int kTextVersion = 1;

inline void export_text(const MedBlockTree& tree, std::ostream& out) {
  const auto& params = tree.params();
  out << kTextMagic << ' ' << kTextVersion << '\n';
  out << "group " << params.name() << ' ' << params.p().get_str(16) << ' ' << params.q().get_str(16) << ' '
      << params.g().value.get_str(16) << '\n';
  auto hex = [&](const auto& v) { return to_hex(params.encode(v)); };
  for (const auto& [id, br] : tree.branches()) {
    for (std::size_t seq = 0; seq < br.blocks.size(); ++seq) {
      const Block& b = br.blocks[seq];
      out << "block " << b.index.branch << ' ' << b.index.seq << ' ';
      if (seq == 0 && br.origin) {
        out << br.origin->branch << '.' << br.origin->seq;
      } else {
        out << '-';
      }
      out << ' ' << hex(b.pre_hash) << ' ' << hex(b.digest.h) << ' ' << hex(b.digest.zeta) << ' '
          << hex(b.meta.patient_pk) << ' ' << hex(b.meta.doctor_pk) << ' ' << b.meta.timestamp_ms << ' '
          << (b.meta.keywords.empty() ? std::string("-") : to_hex(as_bytes(b.meta.keywords))) << ' '
          << b.meta.meta_id << ' ' << hex(b.proposer_pk) << ' ' << to_hex(crypto::encode(params, b.vrf))
          << ' ' << b.committed_round << '\n';
    }
  }
}

inline std::string export_text(const MedBlockTree& tree) {
  std::ostringstream s;
  export_text(tree, s);
  return s.str();
}

inline crypto::Group resolve_group(const std::string& name, const mpz_class& p, const mpz_class& q,
                                   const mpz_class& g) {
  for (const auto& known : {crypto::profiles::tiny(), crypto::profiles::test512()}) {
    if (known->name() == name && known->p() == p && known->q() == q && known->g().value == g) return known;
  }
  if (name == "demo2048") {
    auto demo = crypto::profiles::demo2048();
    if (demo->p() == p && demo->q() == q && demo->g().value == g) return demo;
  }
  return crypto::GroupParams::create(p, q, g, name);
}

// Loads a tree without validating its contents; run validate_tree() after.
inline MedBlockTree import_text(std::istream& in) {
  std::string line;
  auto fail = [](const std::string& why) { return Error(ErrorKind::kFormat, "tree text: " + why); };
  if (!std::getline(in, line)) throw fail("empty input");
  {
    std::istringstream h(line);
    std::string magic;
    int version = 0;
    h >> magic >> version;
    if (magic != kTextMagic || version != kTextVersion) throw fail("bad header");
  }
  if (!std::getline(in, line)) throw fail("missing group line");
  crypto::Group group;
  {
    std::istringstream g(line);
    std::string tag, name, p, q, gen;
    if (!(g >> tag >> name >> p >> q >> gen) || tag != "group") throw fail("bad group line");
    group = resolve_group(name, mpz_class(p, 16), mpz_class(q, 16), mpz_class(gen, 16));
  }
  const auto& params = *group;
  std::map<BranchId, MedBlockTree::Branch> branches;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string tag, origin, pre, h, zeta, patient, doctor, keywords, proposer, vrf;
    Block b;
    if (!(s >> tag >> b.index.branch >> b.index.seq >> origin >> pre >> h >> zeta >> patient >> doctor >>
          b.meta.timestamp_ms >> keywords >> b.meta.meta_id >> proposer >> vrf >> b.committed_round) ||
        tag != "block") {
      throw fail("malformed block at line " + std::to_string(line_no));
    }
    b.pre_hash = params.decode_element(from_hex(pre));
    b.digest.h = params.decode_element(from_hex(h));
    b.digest.zeta = params.decode_scalar(from_hex(zeta));
    b.meta.patient_pk = params.decode_element(from_hex(patient));
    b.meta.doctor_pk = params.decode_element(from_hex(doctor));
    if (keywords != "-") {
      auto kw = from_hex(keywords);
      b.meta.keywords.assign(kw.begin(), kw.end());
    }
    b.proposer_pk = params.decode_element(from_hex(proposer));
    b.vrf = crypto::decode_vrf(params, from_hex(vrf));
    auto& br = branches[b.index.branch];
    if (origin != "-") {
      auto dot = origin.find('.');
      if (dot == std::string::npos) throw fail("bad origin at line " + std::to_string(line_no));
      br.origin = BlockIndex{static_cast<BranchId>(std::stoul(origin.substr(0, dot))),
                             static_cast<std::uint32_t>(std::stoul(origin.substr(dot + 1)))};
    }
    br.blocks.push_back(std::move(b));
  }
  if (branches.empty()) throw fail("no blocks");
  return MedBlockTree::restore(std::move(group), std::move(branches));
}

inline MedBlockTree import_text(const std::string& text) {
  std::istringstream s(text);
  return import_text(s);
}

inline void export_file(const MedBlockTree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path);
  export_text(tree, out);
}

inline MedBlockTree import_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return import_text(in);
}

}  // namespace mbt::tree
