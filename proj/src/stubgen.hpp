#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "descriptor.hpp"
#include "dex_model.hpp"

namespace dexpatch {

inline constexpr const char* kDefaultStubClass = "Lru/innopolis/Stub;";

enum class ReturnStrategy : uint8_t {
    VOID,
    ZERO_PRIMITIVE,
    ZERO_WIDE,
    NULL_REFERENCE,
    CONSTRUCT_DEFAULT,
};

const char* return_strategy_name(ReturnStrategy s);

struct StubPrototype {
    std::vector<std::string> parameter_descriptors;
    std::string return_descriptor;
    bool operator==(const StubPrototype&) const = default;
    auto operator<=>(const StubPrototype&) const = default;
};

struct StubMethod {
    std::string name;
    StubPrototype proto;
    ReturnStrategy strategy = ReturnStrategy::VOID;
    MethodDescriptor origin;
    bool receiver_prepended = false;
};

struct StubSpec {
    std::string stub_class_descriptor = kDefaultStubClass;
    std::vector<StubMethod> methods;  // names unique, deterministic order
};

// Pool indices emit_stub_code needs for CONSTRUCT_DEFAULT bodies; the merger
// resolves them in the merged pool before emitting.
struct StubCodeRefs {
    uint16_t return_type_idx = 0;  // new-instance operand
    uint16_t init_method_idx = 0;  // <type>.<init>()V
};

// Receiver class is prepended for every non-static invoke kind so the
// invoke-static rewrite keeps the register list consistent.
StubPrototype derive_stub_prototype(const MethodDescriptor& origin,
                                    uint8_t invoke_kind);

ReturnStrategy choose_return_strategy(std::string_view return_descriptor);

CodeItem emit_stub_code(ReturnStrategy strategy, const StubPrototype& proto,
                        const StubCodeRefs& refs = {});

struct StubHit {
    MethodDescriptor origin;
    std::vector<uint8_t> invoke_kinds;  // distinct opcodes observed, sorted
};

// One stub per distinct (origin, prototype) pair. Deterministic naming:
// stub_<sanitized class>_<name>, numeric suffix on collision.
StubSpec build_stub_specs(const std::vector<StubHit>& hits,
                          std::string_view stub_class = kDefaultStubClass);

// Register span of a parameter list (wide types take two registers).
uint16_t parameter_register_count(const std::vector<std::string>& parameters);

}  // namespace dexpatch
