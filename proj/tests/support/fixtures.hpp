#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dex_model.hpp"

// Test-side dex model assembler. Pool collection, sorting, and index
// resolution are implemented here, independently of the merger/writer, so
// fixtures double as an oracle for the production pool invariants.

namespace dexpatch::test {

struct FixtureIndex {
    const DexFile* dex = nullptr;

    uint32_t string(std::string_view utf8) const;
    uint16_t type(std::string_view descriptor) const;
    uint16_t proto(const std::string& ret, const std::vector<std::string>& params) const;
    uint16_t method(const std::string& cls, const std::string& name,
                    const std::string& ret, const std::vector<std::string>& params) const;
    uint16_t field(const std::string& cls, const std::string& type,
                   const std::string& name) const;
};

struct MethodSpec {
    std::string name;
    std::string ret = "V";
    std::vector<std::string> params;
    uint32_t access_flags = 0;  // kAccPublic added automatically
    bool direct = false;
    bool has_code = true;
    uint16_t registers = 1;
    uint16_t ins = 0;
    uint16_t outs = 0;
    // nullptr = single return-void body
    std::function<std::vector<uint16_t>(const FixtureIndex&)> emit;
    // optional post-pass for tries/debug blobs
    std::function<void(const FixtureIndex&, CodeItem&)> finish;
};

struct FieldSpec {
    std::string name;
    std::string type;
    uint32_t access_flags = 0;
    bool is_static = false;
};

struct ClassSpec {
    std::string descriptor;
    std::string superclass = "Ljava/lang/Object;";
    uint32_t access_flags = 0;
    std::string source_file;  // empty = absent
    std::vector<std::string> interfaces;
    std::vector<uint8_t> static_values;
    std::vector<FieldSpec> fields;
    std::vector<MethodSpec> methods;
    // attach a small annotations directory (class + first-method sets)
    bool annotate = false;
};

class FixtureBuilder {
public:
    void add_class(ClassSpec spec) { classes_.push_back(std::move(spec)); }
    // Pool-only references (framework methods and the like).
    void ref_method(const std::string& cls, const std::string& name,
                    const std::string& ret, const std::vector<std::string>& params);
    void ref_field(const std::string& cls, const std::string& type,
                   const std::string& name);
    void add_string(const std::string& utf8) { extra_strings_.insert(utf8); }
    void add_type(const std::string& descriptor);

    DexFile build();

private:
    struct MethodRef {
        std::string cls, name, ret;
        std::vector<std::string> params;
        bool operator<(const MethodRef& o) const {
            return std::tie(cls, name, ret, params) <
                   std::tie(o.cls, o.name, o.ret, o.params);
        }
    };
    struct FieldRef {
        std::string cls, type, name;
        bool operator<(const FieldRef& o) const {
            return std::tie(cls, type, name) < std::tie(o.cls, o.type, o.name);
        }
    };

    std::vector<ClassSpec> classes_;
    std::set<MethodRef> method_refs_;
    std::set<FieldRef> field_refs_;
    std::set<std::string> extra_strings_;
    std::set<std::string> extra_types_;
};

// ---- canned fixtures ----

// One app class whose virtual method calls
// Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;
// via invoke-virtual. The call site is at code unit 0 of
// Lcom/example/app/MainActivity;->leak()Ljava/lang/String;.
DexFile telephony_fixture();

// Bodies covering all nine patchable invoke kinds against one blacklisted
// target plus non-blacklisted decoys; site count by construction.
struct InvokeZoo {
    DexFile dex;
    uint32_t planted_sites = 0;   // sites on the blacklisted target
    uint32_t decoy_sites = 0;     // invoke sites that must stay untouched
};
InvokeZoo invoke_zoo_fixture();

// Deterministic pseudo-random round-trip fixture.
DexFile random_fixture(uint32_t seed, int n_classes, int n_extra_strings);

// Pool-heavy fixture: `n_method_refs` distinct framework references plus
// `n_sites` planted blacklisted call sites spread over defined methods;
// filler code pads the file. Used for merge-scale and throughput checks.
DexFile big_fixture(uint32_t n_method_refs, uint32_t n_sites,
                    uint32_t filler_units_per_method = 4000,
                    uint32_t filler_methods = 0);

// Descriptor the canned fixtures blacklist.
inline constexpr const char* kImeiTarget =
    "Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;";

}  // namespace dexpatch::test
