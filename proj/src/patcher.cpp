#include "patcher.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "error.hpp"
#include "instructions.hpp"
#include "merger.hpp"
#include "resolver.hpp"
#include "strutil.hpp"

namespace dexpatch {

namespace {

struct FoundSite {
    size_t class_pos = 0;      // class_defs position in the input
    bool is_direct = false;
    uint32_t containing_idx = 0;  // old method pool index of the enclosing method
    InvokeSite site;
    size_t target_pos = 0;     // position in the hit list
};

EncodedMethod* find_encoded_method(std::vector<EncodedMethod>& methods, uint32_t idx) {
    auto lo = std::lower_bound(methods.begin(), methods.end(), idx,
                               [](const EncodedMethod& m, uint32_t i) {
                                   return m.method_idx < i;
                               });
    if (lo == methods.end() || lo->method_idx != idx) return nullptr;
    return &*lo;
}

}  // namespace

std::string PatchReport::to_text() const {
    std::string out;
    out += "patch report\n";
    out += "  scanned methods:      " + std::to_string(scanned_methods) + "\n";
    out += "  scanned instructions: " + std::to_string(scanned_instructions) + "\n";
    out += "  patched sites:        " + std::to_string(patched_sites) + "\n";
    if (!stub_class_descriptor.empty())
        out += "  stub class:           " + stub_class_descriptor + "\n";
    for (const PatchEntry& e : entries) {
        out += "site: " + e.containing_method.canonical() + " @" +
               std::to_string(e.code_offset) + ": " +
               invoke_mnemonic(e.old_opcode) + " -> " + invoke_mnemonic(e.new_opcode) +
               ", target " + e.target.canonical() + ", method index " +
               hex16(static_cast<uint16_t>(e.old_method_idx)) + " -> " +
               hex16(static_cast<uint16_t>(e.new_method_idx)) + "\n";
    }
    for (const MethodDescriptor& d : inert_entries)
        out += "inert: " + d.canonical() + "\n";
    return out;
}

std::string PatchReport::to_tsv() const {
    std::string out;
    for (const PatchEntry& e : entries) {
        out += e.class_descriptor;
        out += '\t';
        out += e.containing_method.canonical();
        out += '\t';
        out += std::to_string(e.code_offset);
        out += '\t';
        out += hex8(e.old_opcode);
        out += '\t';
        out += hex8(e.new_opcode);
        out += '\t';
        out += std::to_string(e.old_method_idx);
        out += '\t';
        out += std::to_string(e.new_method_idx);
        out += '\t';
        out += e.target.canonical();
        out += '\n';
    }
    return out;
}

PatchResult patch_dex(const DexFile& dex, const Blacklist& blacklist,
                      const PatchOptions& options) {
    validate(dex);
    CallTargets targets = find_call_targets(dex, blacklist.descriptors());

    std::map<uint32_t, size_t> target_by_idx;  // method pool idx -> hit position
    for (size_t i = 0; i < targets.hits.size(); ++i)
        target_by_idx.emplace(targets.hits[i].method_idx, i);

    PatchResult result;
    PatchReport& report = result.report;

    // Scan every code item; record blacklisted sites and which invoke kinds
    // reach each target.
    std::vector<FoundSite> sites;
    std::vector<std::set<uint8_t>> kinds_per_hit(targets.hits.size());
    for (size_t ci = 0; ci < dex.class_defs.size(); ++ci) {
        const ClassDef& c = dex.class_defs[ci];
        if (!c.class_data) continue;
        auto scan_list = [&](const std::vector<EncodedMethod>& methods, bool direct) {
            for (const EncodedMethod& m : methods) {
                if (!m.code) continue;
                ++report.scanned_methods;
                std::vector<DecodedInsn> decoded;
                std::vector<InvokeSite> invokes;
                try {
                    decoded = decode_instructions(*m.code);
                    invokes = scan_invokes(*m.code);
                } catch (const DexError& e) {
                    fail(Errc::MalformedCode,
                         method_id_to_descriptor(dex, m.method_idx).canonical() +
                             ": " + e.what());
                }
                for (const DecodedInsn& insn : decoded)
                    if (!insn.is_payload) ++report.scanned_instructions;
                for (const InvokeSite& site : invokes) {
                    auto hit = target_by_idx.find(site.method_idx);
                    if (hit == target_by_idx.end()) continue;
                    kinds_per_hit[hit->second].insert(site.opcode);
                    sites.push_back({ci, direct, m.method_idx, site, hit->second});
                }
            }
        };
        scan_list(c.class_data->direct_methods, true);
        scan_list(c.class_data->virtual_methods, false);
    }

    auto list_inert = [&](const std::vector<std::set<uint8_t>>& kinds) {
        for (const MethodDescriptor& d : targets.inert)
            report.inert_entries.push_back(d);
        for (size_t i = 0; i < targets.hits.size(); ++i)
            if (kinds[i].empty())
                report.inert_entries.push_back(targets.hits[i].descriptor);
    };

    if (sites.empty()) {
        result.dex = dex;
        result.changed = false;
        list_inert(kinds_per_hit);
        return result;
    }

    std::vector<StubHit> stub_hits;
    for (size_t i = 0; i < targets.hits.size(); ++i) {
        if (kinds_per_hit[i].empty()) continue;
        StubHit hit;
        hit.origin = targets.hits[i].descriptor;
        hit.invoke_kinds.assign(kinds_per_hit[i].begin(), kinds_per_hit[i].end());
        stub_hits.push_back(std::move(hit));
    }
    StubSpec spec = build_stub_specs(stub_hits, options.stub_class);
    MergeResult merged = merge_stub(dex, spec);
    result.dex = std::move(merged.dex);

    // stub lookup: (origin canonical, receiver_prepended) -> new method index
    std::map<std::pair<std::string, bool>, uint32_t> stub_index;
    for (size_t i = 0; i < spec.methods.size(); ++i)
        stub_index[{spec.methods[i].origin.canonical(),
                    spec.methods[i].receiver_prepended}] =
            merged.stub_method_indices[i];

    for (const FoundSite& found : sites) {
        ClassDef& c = result.dex.class_defs[found.class_pos];
        uint32_t new_containing = merged.remap.methods[found.containing_idx];
        EncodedMethod* m = find_encoded_method(
            found.is_direct ? c.class_data->direct_methods
                            : c.class_data->virtual_methods,
            new_containing);
        if (!m || !m->code)
            fail(Errc::Validation, "patched method lost its code during merge");

        const CallTarget& target = targets.hits[found.target_pos];
        bool prepended = !is_invoke_static_kind(found.site.opcode);
        uint32_t stub_idx = stub_index.at({target.descriptor.canonical(), prepended});

        InvokeSite site = found.site;
        site.method_idx = static_cast<uint16_t>(merged.remap.methods[site.method_idx]);
        rewrite_site(*m->code, site, static_cast<uint16_t>(stub_idx));

        PatchEntry entry;
        entry.class_descriptor = resolve_type(dex, dex.class_defs[found.class_pos].class_idx);
        entry.containing_method = method_id_to_descriptor(dex, found.containing_idx);
        entry.code_offset = found.site.code_offset;
        entry.old_opcode = found.site.opcode;
        entry.new_opcode = found.site.is_range ? kInvokeStaticRange : kInvokeStatic;
        entry.old_method_idx = found.site.method_idx;
        entry.new_method_idx = stub_idx;
        entry.target = target.descriptor;
        report.entries.push_back(std::move(entry));
    }

    report.patched_sites = static_cast<uint32_t>(report.entries.size());
    report.stub_class_descriptor = spec.stub_class_descriptor;
    list_inert(kinds_per_hit);
    validate(result.dex);
    result.changed = true;
    return result;
}

}  // namespace dexpatch
