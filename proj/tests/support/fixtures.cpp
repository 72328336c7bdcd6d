#include "fixtures.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "reference.hpp"

namespace dexpatch::test {

namespace {

uint16_t param_regs(const std::vector<std::string>& params) {
    uint16_t n = 0;
    for (const auto& p : params) n += (p == "J" || p == "D") ? 2 : 1;
    return n;
}

void append(std::vector<uint8_t>& out, const std::vector<uint8_t>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

// visibility byte + encoded_annotation with zero elements
std::vector<uint8_t> empty_annotation(uint16_t type_idx) {
    std::vector<uint8_t> item{0x01};  // VISIBILITY_RUNTIME
    append(item, ref_uleb128(type_idx));
    append(item, ref_uleb128(0));
    return item;
}

}  // namespace

uint32_t FixtureIndex::string(std::string_view utf8) const {
    std::u16string u = ref_utf8_to_utf16(utf8);
    for (uint32_t i = 0; i < dex->strings.size(); ++i)
        if (dex->strings[i] == u) return i;
    throw std::runtime_error("fixture: string not in pool: " + std::string(utf8));
}

uint16_t FixtureIndex::type(std::string_view descriptor) const {
    uint32_t s = string(descriptor);
    for (uint32_t i = 0; i < dex->type_ids.size(); ++i)
        if (dex->type_ids[i].descriptor_idx == s) return static_cast<uint16_t>(i);
    throw std::runtime_error("fixture: type not in pool: " + std::string(descriptor));
}

uint16_t FixtureIndex::proto(const std::string& ret,
                             const std::vector<std::string>& params) const {
    uint16_t r = type(ret);
    std::vector<uint16_t> p;
    for (const auto& d : params) p.push_back(type(d));
    for (uint32_t i = 0; i < dex->proto_ids.size(); ++i)
        if (dex->proto_ids[i].return_type_idx == r && dex->proto_ids[i].parameters == p)
            return static_cast<uint16_t>(i);
    throw std::runtime_error("fixture: proto not in pool: " + ret);
}

uint16_t FixtureIndex::method(const std::string& cls, const std::string& name,
                              const std::string& ret,
                              const std::vector<std::string>& params) const {
    uint16_t c = type(cls);
    uint32_t n = string(name);
    uint16_t p = proto(ret, params);
    for (uint32_t i = 0; i < dex->method_ids.size(); ++i) {
        const MethodId& m = dex->method_ids[i];
        if (m.class_idx == c && m.name_idx == n && m.proto_idx == p)
            return static_cast<uint16_t>(i);
    }
    throw std::runtime_error("fixture: method not in pool: " + cls + "->" + name);
}

uint16_t FixtureIndex::field(const std::string& cls, const std::string& type_d,
                             const std::string& name) const {
    uint16_t c = type(cls);
    uint16_t t = type(type_d);
    uint32_t n = string(name);
    for (uint32_t i = 0; i < dex->field_ids.size(); ++i) {
        const FieldId& f = dex->field_ids[i];
        if (f.class_idx == c && f.type_idx == t && f.name_idx == n)
            return static_cast<uint16_t>(i);
    }
    throw std::runtime_error("fixture: field not in pool: " + cls + "->" + name);
}

void FixtureBuilder::ref_method(const std::string& cls, const std::string& name,
                                const std::string& ret,
                                const std::vector<std::string>& params) {
    method_refs_.insert(MethodRef{cls, name, ret, params});
}

void FixtureBuilder::ref_field(const std::string& cls, const std::string& type,
                               const std::string& name) {
    field_refs_.insert(FieldRef{cls, type, name});
}

void FixtureBuilder::add_type(const std::string& descriptor) {
    extra_types_.insert(descriptor);
}

DexFile FixtureBuilder::build() {
    std::set<MethodRef> methods = method_refs_;
    std::set<FieldRef> fields = field_refs_;
    std::set<std::string> types = extra_types_;
    std::set<std::string> strings = extra_strings_;

    for (const auto& c : classes_) {
        types.insert(c.descriptor);
        if (!c.superclass.empty()) types.insert(c.superclass);
        for (const auto& i : c.interfaces) types.insert(i);
        if (!c.source_file.empty()) strings.insert(c.source_file);
        for (const auto& f : c.fields) fields.insert(FieldRef{c.descriptor, f.type, f.name});
        for (const auto& m : c.methods)
            methods.insert(MethodRef{c.descriptor, m.name, m.ret, m.params});
        if (c.annotate) types.insert("Ljava/lang/Deprecated;");
    }
    for (const auto& m : methods) {
        types.insert(m.cls);
        types.insert(m.ret);
        for (const auto& p : m.params) types.insert(p);
        strings.insert(m.name);
        strings.insert(ref_shorty(m.ret, m.params));
    }
    for (const auto& f : fields) {
        types.insert(f.cls);
        types.insert(f.type);
        strings.insert(f.name);
    }
    for (const auto& t : types) strings.insert(t);

    DexFile dex;

    // string pool: unique, ascending by utf-16 code units
    std::vector<std::u16string> u16s;
    u16s.reserve(strings.size());
    for (const auto& s : strings) u16s.push_back(ref_utf8_to_utf16(s));
    std::sort(u16s.begin(), u16s.end());
    u16s.erase(std::unique(u16s.begin(), u16s.end()), u16s.end());
    dex.strings = u16s;
    std::map<std::u16string, uint32_t> sidx;
    for (uint32_t i = 0; i < u16s.size(); ++i) sidx.emplace(u16s[i], i);
    auto str_of = [&](const std::string& s) { return sidx.at(ref_utf8_to_utf16(s)); };

    // type pool: ascending by descriptor string index
    std::vector<std::string> tlist(types.begin(), types.end());
    std::sort(tlist.begin(), tlist.end(),
              [&](const std::string& a, const std::string& b) { return str_of(a) < str_of(b); });
    std::map<std::string, uint16_t> tidx;
    for (const auto& t : tlist) {
        tidx.emplace(t, static_cast<uint16_t>(dex.type_ids.size()));
        dex.type_ids.push_back(TypeId{str_of(t)});
    }

    // proto pool: ascending by (return type, parameter list); std::map ordering
    // on the resolved key matches the required sort
    std::map<std::pair<uint16_t, std::vector<uint16_t>>, std::string> protos;
    for (const auto& m : methods) {
        std::vector<uint16_t> p;
        for (const auto& d : m.params) p.push_back(tidx.at(d));
        protos.emplace(std::make_pair(tidx.at(m.ret), std::move(p)),
                       ref_shorty(m.ret, m.params));
    }
    std::map<std::pair<uint16_t, std::vector<uint16_t>>, uint16_t> pidx;
    for (const auto& [key, shorty] : protos) {
        pidx.emplace(key, static_cast<uint16_t>(dex.proto_ids.size()));
        dex.proto_ids.push_back(ProtoId{str_of(shorty), key.first, key.second});
    }

    // field pool: ascending by (class, name, type)
    std::vector<FieldId> fid;
    for (const auto& f : fields)
        fid.push_back(FieldId{tidx.at(f.cls), tidx.at(f.type), str_of(f.name)});
    std::sort(fid.begin(), fid.end(), [](const FieldId& a, const FieldId& b) {
        return std::tie(a.class_idx, a.name_idx, a.type_idx) <
               std::tie(b.class_idx, b.name_idx, b.type_idx);
    });
    dex.field_ids = fid;

    // method pool: ascending by (class, name, proto)
    std::vector<MethodId> mid;
    for (const auto& m : methods) {
        std::vector<uint16_t> p;
        for (const auto& d : m.params) p.push_back(tidx.at(d));
        mid.push_back(MethodId{tidx.at(m.cls),
                               pidx.at(std::make_pair(tidx.at(m.ret), std::move(p))),
                               str_of(m.name)});
    }
    std::sort(mid.begin(), mid.end(), [](const MethodId& a, const MethodId& b) {
        return std::tie(a.class_idx, a.name_idx, a.proto_idx) <
               std::tie(b.class_idx, b.name_idx, b.proto_idx);
    });
    dex.method_ids = mid;

    FixtureIndex ix{&dex};

    for (const auto& c : classes_) {
        ClassDef cd;
        cd.class_idx = ix.type(c.descriptor);
        cd.access_flags = c.access_flags | kAccPublic;
        cd.superclass_idx = c.superclass.empty() ? kNoIndex : ix.type(c.superclass);
        for (const auto& i : c.interfaces) cd.interfaces.push_back(ix.type(i));
        cd.source_file_idx = c.source_file.empty() ? kNoIndex : ix.string(c.source_file);
        cd.static_values = c.static_values;

        if (!c.fields.empty() || !c.methods.empty()) {
            ClassData data;
            for (const auto& f : c.fields) {
                EncodedField ef;
                ef.field_idx = ix.field(c.descriptor, f.type, f.name);
                ef.access_flags = f.access_flags | kAccPublic |
                                  (f.is_static ? kAccStatic : 0u);
                (f.is_static ? data.static_fields : data.instance_fields).push_back(ef);
            }
            for (const auto& m : c.methods) {
                EncodedMethod em;
                em.method_idx = ix.method(c.descriptor, m.name, m.ret, m.params);
                em.access_flags = m.access_flags | kAccPublic;
                if (m.has_code) {
                    CodeItem code;
                    code.registers_size = m.registers;
                    code.ins_size = m.ins;
                    code.outs_size = m.outs;
                    code.insns = m.emit ? m.emit(ix) : std::vector<uint16_t>{0x000e};
                    if (m.finish) m.finish(ix, code);
                    em.code = std::move(code);
                }
                (m.direct ? data.direct_methods : data.virtual_methods).push_back(em);
            }
            auto by_fidx = [](const EncodedField& a, const EncodedField& b) {
                return a.field_idx < b.field_idx;
            };
            auto by_midx = [](const EncodedMethod& a, const EncodedMethod& b) {
                return a.method_idx < b.method_idx;
            };
            std::sort(data.static_fields.begin(), data.static_fields.end(), by_fidx);
            std::sort(data.instance_fields.begin(), data.instance_fields.end(), by_fidx);
            std::sort(data.direct_methods.begin(), data.direct_methods.end(), by_midx);
            std::sort(data.virtual_methods.begin(), data.virtual_methods.end(), by_midx);
            cd.class_data = std::move(data);
        }

        if (c.annotate) {
            AnnotationsDirectory dir;
            AnnotationSet set;
            set.items.push_back(empty_annotation(ix.type("Ljava/lang/Deprecated;")));
            dir.class_annotations = set;
            if (!c.fields.empty()) {
                const auto& f = c.fields.front();
                dir.field_annotations.emplace_back(
                    ix.field(c.descriptor, f.type, f.name), set);
            }
            if (!c.methods.empty()) {
                const auto& m = c.methods.front();
                uint32_t midx = ix.method(c.descriptor, m.name, m.ret, m.params);
                dir.method_annotations.emplace_back(midx, set);
                if (!m.params.empty()) {
                    std::vector<std::optional<AnnotationSet>> per_param(m.params.size());
                    per_param[0] = set;
                    dir.parameter_annotations.emplace_back(midx, std::move(per_param));
                }
            }
            cd.annotations = std::move(dir);
        }

        dex.class_defs.push_back(std::move(cd));
    }

    return dex;
}

// ---- canned fixtures ----

namespace {

constexpr const char* kTelephonyManager = "Landroid/telephony/TelephonyManager;";
constexpr const char* kString = "Ljava/lang/String;";

MethodSpec object_init_ctor() {
    MethodSpec init;
    init.name = "<init>";
    init.access_flags = kAccConstructor;
    init.direct = true;
    init.registers = 1;
    init.ins = 1;
    init.outs = 1;
    init.emit = [](const FixtureIndex& ix) {
        uint16_t super = ix.method("Ljava/lang/Object;", "<init>", "V", {});
        return std::vector<uint16_t>{0x1070, super, 0x0000, 0x000e};
    };
    return init;
}

// packed-switch and fill-array-data payloads, no pool references
std::vector<uint16_t> payload_body() {
    return {
        0x0012,                          // const/4 v0, #0
        0x002b, 0x0005, 0x0000,          // packed-switch v0, +5
        0x000e,                          // return-void
        0x0000,                          // nop (payload alignment)
        0x0100, 0x0002,                  // packed-switch-payload, size 2
        0x0000, 0x0000,                  // first_key 0
        0x0003, 0x0000, 0x0003, 0x0000,  // branch targets
        0x0026, 0x0004, 0x0000,          // fill-array-data v0, +4
        0x000e,                          // return-void
        0x0300, 0x0004, 0x0002, 0x0000,  // fill-array-data-payload, width 4, size 2
        0x1111, 0x2222, 0x3333, 0x4444,
    };
}

std::vector<uint16_t> sparse_body() {
    return {
        0x0012,                          // const/4 v0, #0
        0x002c, 0x0003, 0x0000,          // sparse-switch v0, +3
        0x0200, 0x0001,                  // sparse-switch-payload, size 1
        0x002a, 0x0000,                  // key 42
        0x0009, 0x0000,                  // branch target
        0x000e,                          // return-void
    };
}

// throw inside a guarded range; handler blob attached via finish
MethodSpec guarded_method(std::string name, std::string exception, bool catch_all) {
    MethodSpec m;
    m.name = std::move(name);
    m.registers = 2;
    m.ins = 1;
    m.emit = [](const FixtureIndex&) {
        return std::vector<uint16_t>{
            0x0012,  // const/4 v0, #0
            0x0027,  // throw v0
            0x000e,  // return-void
            0x000d,  // move-exception v0
            0x000e,  // return-void
        };
    };
    m.finish = [exception = std::move(exception), catch_all](const FixtureIndex& ix,
                                                             CodeItem& code) {
        code.tries_size = 1;
        // try_item: start 0, count 3, handler_off 1 (past the list-size uleb)
        std::vector<uint8_t> blob{0, 0, 0, 0, 3, 0, 1, 0};
        blob.push_back(0x01);  // handler list size
        if (catch_all) {
            blob.push_back(0x00);  // sleb 0: catch-all only
            append(blob, ref_uleb128(3));
        } else {
            blob.push_back(0x01);  // one typed catch
            append(blob, ref_uleb128(ix.type(exception)));
            append(blob, ref_uleb128(3));
        }
        code.tries_and_handlers = std::move(blob);
    };
    return m;
}

}  // namespace

DexFile telephony_fixture() {
    FixtureBuilder b;
    b.ref_method(kTelephonyManager, "getDeviceId", kString, {});
    b.ref_method("Ljava/lang/Object;", "<init>", "V", {});

    ClassSpec main;
    main.descriptor = "Lcom/example/app/MainActivity;";
    main.source_file = "MainActivity.java";
    main.methods.push_back(object_init_ctor());

    MethodSpec leak;
    leak.name = "leak";
    leak.ret = kString;
    leak.registers = 2;
    leak.ins = 1;
    leak.outs = 1;
    leak.emit = [](const FixtureIndex& ix) {
        uint16_t target = ix.method(kTelephonyManager, "getDeviceId", kString, {});
        return std::vector<uint16_t>{
            0x106e, target, 0x0001,  // invoke-virtual {v1}
            0x000c,                  // move-result-object v0
            0x0011,                  // return-object v0
        };
    };
    main.methods.push_back(std::move(leak));

    b.add_class(std::move(main));
    return b.build();
}

InvokeZoo invoke_zoo_fixture() {
    FixtureBuilder b;
    b.ref_method(kTelephonyManager, "getDeviceId", kString, {});
    b.ref_method(kTelephonyManager, "getSubscriberId", kString, {});
    b.ref_method("Lcom/other/Device;", "getDeviceId", kString, {});
    b.add_type("Ljava/lang/Exception;");

    ClassSpec helper;
    helper.descriptor = "Lcom/example/zoo/Helper;";
    helper.fields.push_back(FieldSpec{"count", "I", 0, true});
    MethodSpec poke;
    poke.name = "poke";
    poke.registers = 1;
    poke.ins = 1;
    helper.methods.push_back(poke);
    MethodSpec bump;
    bump.name = "bump";
    bump.registers = 2;
    bump.ins = 1;
    bump.emit = [](const FixtureIndex& ix) {
        uint16_t f = ix.field("Lcom/example/zoo/Helper;", "I", "count");
        return std::vector<uint16_t>{
            0x0060, f,  // sget v0
            0x0067, f,  // sput v0
            0x000e,
        };
    };
    helper.methods.push_back(std::move(bump));
    b.add_class(std::move(helper));

    ClassSpec caller;
    caller.descriptor = "Lcom/example/zoo/Caller;";

    MethodSpec mix;
    mix.name = "mix";
    mix.ret = kString;
    mix.registers = 2;
    mix.ins = 1;
    mix.outs = 1;
    mix.emit = [](const FixtureIndex& ix) {
        uint16_t t = ix.method(kTelephonyManager, "getDeviceId", kString, {});
        return std::vector<uint16_t>{
            0x106e, t, 0x0001, 0x000c,  // invoke-virtual {v1}
            0x106f, t, 0x0001, 0x000c,  // invoke-super {v1}
            0x1070, t, 0x0001, 0x000c,  // invoke-direct {v1}
            0x0071, t, 0x0000, 0x000c,  // invoke-static {}
            0x1072, t, 0x0001, 0x000c,  // invoke-interface {v1}
            0x0011,                     // return-object v0
        };
    };
    caller.methods.push_back(std::move(mix));

    MethodSpec ranges;
    ranges.name = "ranges";
    ranges.registers = 2;
    ranges.ins = 1;
    ranges.outs = 1;
    ranges.emit = [](const FixtureIndex& ix) {
        uint16_t t = ix.method(kTelephonyManager, "getDeviceId", kString, {});
        return std::vector<uint16_t>{
            0x0174, t, 0x0001, 0x000c,  // invoke-virtual/range {v1..v1}
            0x0175, t, 0x0001, 0x000c,  // invoke-super/range
            0x0176, t, 0x0001, 0x000c,  // invoke-direct/range
            0x0077, t, 0x0000, 0x000c,  // invoke-static/range {}
            0x000e,
        };
    };
    caller.methods.push_back(std::move(ranges));

    MethodSpec decoys;
    decoys.name = "decoys";
    decoys.registers = 2;
    decoys.ins = 1;
    decoys.outs = 1;
    decoys.emit = [](const FixtureIndex& ix) {
        uint16_t d1 = ix.method(kTelephonyManager, "getSubscriberId", kString, {});
        uint16_t d2 = ix.method("Lcom/other/Device;", "getDeviceId", kString, {});
        uint16_t d3 = ix.method("Lcom/example/zoo/Helper;", "poke", "V", {});
        return std::vector<uint16_t>{
            0x106e, d1, 0x0001, 0x000c,  // same class, other name
            0x106e, d2, 0x0001, 0x000c,  // other class, same name
            0x106e, d3, 0x0001,          // app-internal target
            0x000e,
        };
    };
    caller.methods.push_back(std::move(decoys));

    MethodSpec payloads;
    payloads.name = "payloads";
    payloads.registers = 2;
    payloads.ins = 1;
    payloads.emit = [](const FixtureIndex&) { return payload_body(); };
    caller.methods.push_back(std::move(payloads));

    MethodSpec sparse;
    sparse.name = "sparse";
    sparse.registers = 2;
    sparse.ins = 1;
    sparse.emit = [](const FixtureIndex&) { return sparse_body(); };
    caller.methods.push_back(std::move(sparse));

    caller.methods.push_back(guarded_method("guarded", "Ljava/lang/Exception;", false));

    b.add_class(std::move(caller));

    InvokeZoo zoo;
    zoo.dex = b.build();
    zoo.planted_sites = 9;  // mix: 5, ranges: 4
    zoo.decoy_sites = 3;
    return zoo;
}

DexFile random_fixture(uint32_t seed, int n_classes, int n_extra_strings) {
    std::mt19937 rng(seed);
    auto pick = [&](uint32_t n) { return static_cast<uint32_t>(rng() % n); };

    FixtureBuilder b;
    b.ref_method("Ljava/util/List;", "size", "I", {});
    b.add_type("Ljava/lang/Exception;");
    b.add_type("Ljava/lang/Throwable;");

    b.add_string("caf\xC3\xA9");
    b.add_string("\xE4\xBD\xA0\xE5\xA5\xBD");
    b.add_string("a\xF0\x9F\x98\x80z");
    b.add_string(std::string("embedded\0nul", 12));
    static const char charset[] = "abcdefghijklmnopqrstuvwxyz0123456789_$";
    for (int i = 0; i < n_extra_strings; ++i) {
        std::string s = "x" + std::to_string(i) + "_";
        uint32_t len = pick(20);
        for (uint32_t j = 0; j < len; ++j) s += charset[pick(sizeof(charset) - 1)];
        b.add_string(s);
    }

    std::vector<std::string> descriptors;
    for (int ci = 0; ci < n_classes; ++ci)
        descriptors.push_back("LRand" + std::to_string(seed % 997) + "/C" +
                              std::to_string(ci) + ";");

    static const char* param_table[] = {"I", "J", "Z", "Ljava/lang/String;", "[B"};

    for (int ci = 0; ci < n_classes; ++ci) {
        ClassSpec c;
        c.descriptor = descriptors[ci];
        if (ci > 0 && pick(4) == 0) c.superclass = descriptors[pick(ci)];
        if (pick(3) == 0) c.interfaces.push_back("Ljava/lang/Cloneable;");
        if (pick(3) == 0) c.source_file = "C" + std::to_string(ci) + ".java";
        c.annotate = pick(4) == 0;

        uint32_t n_methods = 1 + pick(4);
        std::vector<uint32_t> variants{0};  // m0: trivial virtual ()V anchor
        for (uint32_t j = 1; j < n_methods; ++j) variants.push_back(1 + pick(8));

        bool has_field_ops =
            std::find(variants.begin(), variants.end(), 2u) != variants.end();
        if (has_field_ops) {
            c.fields.push_back(FieldSpec{"op0", "I", 0, true});
            c.fields.push_back(FieldSpec{"op1", "I", 0, false});
        } else if (pick(3) == 0) {
            c.fields.push_back(FieldSpec{"sv0", "I", kAccFinal, true});
            c.fields.push_back(FieldSpec{"sv1", "I", 0, true});
            // encoded_array: two VALUE_INT entries matching sv0/sv1
            c.static_values = {0x02, 0x04, 0x07, 0x04, 0x2a};
        }
        uint32_t n_plain = pick(3);
        for (uint32_t j = 0; j < n_plain; ++j)
            c.fields.push_back(FieldSpec{
                "f" + std::to_string(j),
                param_table[pick(std::size(param_table))], 0, false});

        for (uint32_t j = 0; j < n_methods; ++j) {
            MethodSpec m;
            m.name = "m" + std::to_string(j);
            uint32_t v = variants[j];
            switch (v) {
                case 0: {  // trivial; random params/staticness for j > 0
                    if (j > 0) {
                        uint32_t np = pick(3);
                        for (uint32_t k = 0; k < np; ++k)
                            m.params.push_back(param_table[pick(std::size(param_table))]);
                        if (pick(2) == 0) {
                            m.direct = true;
                            m.access_flags = kAccStatic;
                        }
                    }
                    m.ins = param_regs(m.params) + (m.direct ? 0 : 1);
                    m.registers = m.ins;
                    break;
                }
                case 1: {  // const-string / jumbo / const-class
                    m.ret = "Ljava/lang/Object;";
                    m.registers = 2;
                    m.ins = 1;
                    std::string d = c.descriptor;
                    m.emit = [d](const FixtureIndex& ix) {
                        uint32_t s = ix.string(d);
                        uint16_t t = ix.type(d);
                        return std::vector<uint16_t>{
                            0x001a, static_cast<uint16_t>(s),
                            0x001b, static_cast<uint16_t>(s),
                            static_cast<uint16_t>(s >> 16),
                            0x001c, t,
                            0x0011,
                        };
                    };
                    break;
                }
                case 2: {  // sget/iget on this class's op fields
                    m.registers = 2;
                    m.ins = 1;
                    std::string d = c.descriptor;
                    m.emit = [d](const FixtureIndex& ix) {
                        uint16_t fs = ix.field(d, "I", "op0");
                        uint16_t fi = ix.field(d, "I", "op1");
                        return std::vector<uint16_t>{
                            0x0060, fs,  // sget v0
                            0x1052, fi,  // iget v0, v1
                            0x000e,
                        };
                    };
                    break;
                }
                case 3: {  // invoke a previously declared class's m0
                    m.registers = 2;
                    m.ins = 1;
                    m.outs = 1;
                    std::string callee = descriptors[pick(ci + 1)];
                    m.emit = [callee](const FixtureIndex& ix) {
                        uint16_t t = ix.method(callee, "m0", "V", {});
                        return std::vector<uint16_t>{0x106e, t, 0x0001, 0x000e};
                    };
                    break;
                }
                case 4: {  // framework interface invoke
                    m.registers = 2;
                    m.ins = 1;
                    m.outs = 1;
                    m.emit = [](const FixtureIndex& ix) {
                        uint16_t t = ix.method("Ljava/util/List;", "size", "I", {});
                        return std::vector<uint16_t>{0x1072, t, 0x0001, 0x000a, 0x000e};
                    };
                    break;
                }
                case 5: {  // wide const + goto
                    m.registers = 3;
                    m.ins = 1;
                    m.emit = [](const FixtureIndex&) {
                        return std::vector<uint16_t>{0x0016, 0x0005, 0x0128, 0x000e};
                    };
                    break;
                }
                case 6: {
                    bool catch_all = pick(2) == 0;
                    const char* exc =
                        pick(2) == 0 ? "Ljava/lang/Exception;" : "Ljava/lang/Throwable;";
                    m = guarded_method(m.name, exc, catch_all);
                    break;
                }
                case 7: {  // debug info blob
                    m.ins = 1;
                    m.registers = 1;
                    uint32_t line = 1 + pick(100);
                    m.finish = [line](const FixtureIndex&, CodeItem& code) {
                        std::vector<uint8_t> blob = ref_uleb128(line);
                        blob.push_back(0x00);  // parameters_size
                        blob.push_back(0x01);  // DBG_ADVANCE_PC
                        append(blob, ref_uleb128(1));
                        blob.push_back(0x00);  // DBG_END_SEQUENCE
                        code.debug_info = std::move(blob);
                    };
                    break;
                }
                case 8: {
                    m.registers = 2;
                    m.ins = 1;
                    m.emit = [odd = pick(2)](const FixtureIndex&) {
                        return odd ? sparse_body() : payload_body();
                    };
                    break;
                }
                default:
                    break;
            }
            c.methods.push_back(std::move(m));
        }
        b.add_class(std::move(c));
    }
    return b.build();
}

DexFile big_fixture(uint32_t n_method_refs, uint32_t n_sites,
                    uint32_t filler_units_per_method, uint32_t filler_methods) {
    FixtureBuilder b;
    b.ref_method(kTelephonyManager, "getDeviceId", kString, {});
    for (uint32_t i = 0; i < n_method_refs; ++i)
        b.ref_method("LBig/R" + std::to_string(i / 500) + ";",
                     "n" + std::to_string(i % 500), "V", {});

    ClassSpec app;
    app.descriptor = "LBig/App;";
    constexpr uint32_t kSitesPerMethod = 16;
    for (uint32_t k = 0; k * kSitesPerMethod < n_sites; ++k) {
        uint32_t count = std::min(kSitesPerMethod, n_sites - k * kSitesPerMethod);
        MethodSpec m;
        m.name = "site" + std::to_string(k);
        m.registers = 2;
        m.ins = 1;
        m.outs = 1;
        m.emit = [count](const FixtureIndex& ix) {
            uint16_t t = ix.method(kTelephonyManager, "getDeviceId", kString, {});
            std::vector<uint16_t> units;
            for (uint32_t s = 0; s < count; ++s)
                units.insert(units.end(), {0x106e, t, 0x0001, 0x000c});
            units.push_back(0x000e);
            return units;
        };
        app.methods.push_back(std::move(m));
    }
    for (uint32_t k = 0; k < filler_methods; ++k) {
        MethodSpec m;
        m.name = "fill" + std::to_string(k);
        m.registers = 2;
        m.ins = 1;
        m.emit = [n = filler_units_per_method](const FixtureIndex&) {
            std::vector<uint16_t> units;
            units.reserve(n);
            while (units.size() + 1 < n) units.push_back(0x0012);
            units.push_back(0x000e);
            return units;
        };
        app.methods.push_back(std::move(m));
    }
    b.add_class(std::move(app));
    return b.build();
}

}  // namespace dexpatch::test
