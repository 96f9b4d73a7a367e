#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ransomguard/error.hpp"

namespace ransomguard {

constexpr std::uint16_t PE_MAGIC_PE32 = 0x10B;
constexpr std::uint16_t PE_MAGIC_PE32PLUS = 0x20B;
constexpr std::size_t PE_MAX_RESOURCE_LEAVES = 4096;
constexpr std::size_t PE_MAX_RESOURCE_DEPTH = 3;

struct pe_section {
    std::string name;
    std::uint32_t virtual_size = 0;
    std::uint32_t virtual_address = 0;
    std::uint32_t raw_size = 0;
    std::uint32_t raw_offset = 0;
    std::uint32_t characteristics = 0;
};

struct pe_resource_leaf {
    std::uint32_t rva = 0;
    std::uint32_t size = 0;
    std::uint32_t file_offset = 0;
};

struct pe_metadata {
    // dos header
    std::uint32_t e_lfanew = 0;
    // coff header
    std::uint16_t machine = 0;
    std::uint16_t number_of_sections = 0;
    std::uint16_t size_of_optional_header = 0;
    std::uint16_t characteristics = 0;
    // optional header
    std::uint16_t magic = 0;
    std::uint8_t major_linker_version = 0;
    std::uint8_t minor_linker_version = 0;
    std::uint32_t size_of_code = 0;
    std::uint32_t size_of_initialized_data = 0;
    std::uint32_t size_of_uninitialized_data = 0;
    std::uint32_t address_of_entry_point = 0;
    std::uint32_t base_of_code = 0;
    std::uint32_t base_of_data = 0; // pe32 only, zero otherwise
    std::uint64_t image_base = 0;
    std::uint32_t section_alignment = 0;
    std::uint32_t file_alignment = 0;
    std::uint16_t major_os_version = 0;
    std::uint16_t minor_os_version = 0;
    std::uint16_t major_image_version = 0;
    std::uint16_t minor_image_version = 0;
    std::uint16_t major_subsystem_version = 0;
    std::uint16_t minor_subsystem_version = 0;
    std::uint32_t size_of_image = 0;
    std::uint32_t size_of_headers = 0;
    std::uint32_t checksum = 0;
    std::uint16_t subsystem = 0;
    std::uint16_t dll_characteristics = 0;
    std::uint64_t size_of_stack_reserve = 0;
    std::uint64_t size_of_stack_commit = 0;
    std::uint64_t size_of_heap_reserve = 0;
    std::uint64_t size_of_heap_commit = 0;
    std::uint32_t loader_flags = 0;
    std::uint32_t number_of_rva_and_sizes = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> data_directories; // rva, size

    std::vector<pe_section> sections;
    std::vector<pe_resource_leaf> resources;
    std::vector<std::uint8_t> data; // owned copy of the file bytes
};

namespace detail {

class pe_reader {
  public:
    explicit pe_reader(const std::vector<std::uint8_t>& d) : d_(d) {}

    std::uint8_t u8(std::size_t off) const {
        check(off, 1);
        return d_[off];
    }
    std::uint16_t u16(std::size_t off) const {
        check(off, 2);
        return static_cast<std::uint16_t>(d_[off] | (d_[off + 1] << 8));
    }
    std::uint32_t u32(std::size_t off) const {
        check(off, 4);
        return static_cast<std::uint32_t>(d_[off]) |
               (static_cast<std::uint32_t>(d_[off + 1]) << 8) |
               (static_cast<std::uint32_t>(d_[off + 2]) << 16) |
               (static_cast<std::uint32_t>(d_[off + 3]) << 24);
    }
    std::uint64_t u64(std::size_t off) const {
        return static_cast<std::uint64_t>(u32(off)) |
               (static_cast<std::uint64_t>(u32(off + 4)) << 32);
    }
    std::size_t size() const { return d_.size(); }

  private:
    void check(std::size_t off, std::size_t n) const {
        if (off + n > d_.size() || off + n < off)
            throw parse_error("truncated header", off);
    }
    const std::vector<std::uint8_t>& d_;
};

inline std::uint32_t rva_to_offset(const pe_metadata& meta, std::uint32_t rva) {
    if (rva < meta.size_of_headers) return rva;
    for (const pe_section& s : meta.sections) {
        std::uint32_t span = std::max(s.virtual_size, s.raw_size);
        if (rva >= s.virtual_address && rva < s.virtual_address + span) {
            return s.raw_offset + (rva - s.virtual_address);
        }
    }
    throw parse_error("rva maps to no section", rva);
}

inline void walk_resources(const pe_reader& r, pe_metadata& meta,
                           std::uint32_t res_base_rva, std::uint32_t res_base_off,
                           std::uint32_t dir_off_rel, std::size_t depth,
                           std::set<std::uint32_t>& visited) {
    if (depth > PE_MAX_RESOURCE_DEPTH) return;
    if (meta.resources.size() >= PE_MAX_RESOURCE_LEAVES) return;
    if (!visited.insert(dir_off_rel).second)
        throw parse_error("resource loop detected", res_base_off + dir_off_rel);

    std::size_t dir = res_base_off + dir_off_rel;
    std::uint16_t named = r.u16(dir + 12);
    std::uint16_t ids = r.u16(dir + 14);
    std::size_t count = static_cast<std::size_t>(named) + ids;
    for (std::size_t i = 0; i < count; ++i) {
        if (meta.resources.size() >= PE_MAX_RESOURCE_LEAVES) return;
        std::size_t entry = dir + 16 + i * 8;
        std::uint32_t offset_field = r.u32(entry + 4);
        if (offset_field & 0x80000000u) {
            walk_resources(r, meta, res_base_rva, res_base_off,
                           offset_field & 0x7FFFFFFFu, depth + 1, visited);
        } else {
            std::size_t data_entry = res_base_off + offset_field;
            std::uint32_t data_rva = r.u32(data_entry);
            std::uint32_t data_size = r.u32(data_entry + 4);
            pe_resource_leaf leaf;
            leaf.rva = data_rva;
            leaf.size = data_size;
            leaf.file_offset = rva_to_offset(meta, data_rva);
            if (static_cast<std::size_t>(leaf.file_offset) + data_size > r.size())
                throw parse_error("resource data out of bounds", leaf.file_offset);
            meta.resources.push_back(leaf);
        }
    }
}

} // namespace detail

inline pe_metadata parse_pe(std::vector<std::uint8_t> bytes) {
    if (bytes.empty()) throw parse_error("empty input", 0);
    detail::pe_reader r(bytes);

    if (r.size() < 64 || r.u8(0) != 'M' || r.u8(1) != 'Z')
        throw parse_error("bad MZ magic", 0);

    pe_metadata meta;
    meta.e_lfanew = r.u32(0x3C);
    std::size_t pe = meta.e_lfanew;
    if (r.u8(pe) != 'P' || r.u8(pe + 1) != 'E' || r.u8(pe + 2) != 0 || r.u8(pe + 3) != 0)
        throw parse_error("bad PE signature", pe);

    std::size_t coff = pe + 4;
    meta.machine = r.u16(coff);
    meta.number_of_sections = r.u16(coff + 2);
    meta.size_of_optional_header = r.u16(coff + 16);
    meta.characteristics = r.u16(coff + 18);

    std::size_t opt = coff + 20;
    if (meta.size_of_optional_header < 2) throw parse_error("missing optional header", opt);
    meta.magic = r.u16(opt);
    bool plus;
    if (meta.magic == PE_MAGIC_PE32) plus = false;
    else if (meta.magic == PE_MAGIC_PE32PLUS) plus = true;
    else throw parse_error("unknown optional header magic", opt);

    meta.major_linker_version = r.u8(opt + 2);
    meta.minor_linker_version = r.u8(opt + 3);
    meta.size_of_code = r.u32(opt + 4);
    meta.size_of_initialized_data = r.u32(opt + 8);
    meta.size_of_uninitialized_data = r.u32(opt + 12);
    meta.address_of_entry_point = r.u32(opt + 16);
    meta.base_of_code = r.u32(opt + 20);
    if (plus) {
        meta.base_of_data = 0;
        meta.image_base = r.u64(opt + 24);
    } else {
        meta.base_of_data = r.u32(opt + 24);
        meta.image_base = r.u32(opt + 28);
    }
    meta.section_alignment = r.u32(opt + 32);
    meta.file_alignment = r.u32(opt + 36);
    meta.major_os_version = r.u16(opt + 40);
    meta.minor_os_version = r.u16(opt + 42);
    meta.major_image_version = r.u16(opt + 44);
    meta.minor_image_version = r.u16(opt + 46);
    meta.major_subsystem_version = r.u16(opt + 48);
    meta.minor_subsystem_version = r.u16(opt + 50);
    meta.size_of_image = r.u32(opt + 56);
    meta.size_of_headers = r.u32(opt + 60);
    meta.checksum = r.u32(opt + 64);
    meta.subsystem = r.u16(opt + 68);
    meta.dll_characteristics = r.u16(opt + 70);
    if (plus) {
        meta.size_of_stack_reserve = r.u64(opt + 72);
        meta.size_of_stack_commit = r.u64(opt + 80);
        meta.size_of_heap_reserve = r.u64(opt + 88);
        meta.size_of_heap_commit = r.u64(opt + 96);
        meta.loader_flags = r.u32(opt + 104);
        meta.number_of_rva_and_sizes = r.u32(opt + 108);
    } else {
        meta.size_of_stack_reserve = r.u32(opt + 72);
        meta.size_of_stack_commit = r.u32(opt + 76);
        meta.size_of_heap_reserve = r.u32(opt + 80);
        meta.size_of_heap_commit = r.u32(opt + 84);
        meta.loader_flags = r.u32(opt + 88);
        meta.number_of_rva_and_sizes = r.u32(opt + 92);
    }
    std::size_t dir_base = opt + (plus ? 112 : 96);
    std::size_t dir_count = std::min<std::size_t>(meta.number_of_rva_and_sizes, 16);
    for (std::size_t i = 0; i < dir_count; ++i) {
        std::size_t off = dir_base + i * 8;
        if (off + 8 > opt + meta.size_of_optional_header) break;
        meta.data_directories.emplace_back(r.u32(off), r.u32(off + 4));
    }

    std::size_t sect_base = opt + meta.size_of_optional_header;
    for (std::size_t i = 0; i < meta.number_of_sections; ++i) {
        std::size_t off = sect_base + i * 40;
        pe_section s;
        char name[9] = {0};
        for (int b = 0; b < 8; ++b) {
            std::uint8_t ch = r.u8(off + static_cast<std::size_t>(b));
            name[b] = static_cast<char>(ch);
        }
        s.name = std::string(name);
        s.virtual_size = r.u32(off + 8);
        s.virtual_address = r.u32(off + 12);
        s.raw_size = r.u32(off + 16);
        s.raw_offset = r.u32(off + 20);
        s.characteristics = r.u32(off + 36);
        if (s.raw_size > 0) {
            std::uint64_t end = static_cast<std::uint64_t>(s.raw_offset) + s.raw_size;
            if (end > bytes.size())
                throw parse_error("section raw span out of bounds", s.raw_offset);
        }
        meta.sections.push_back(s);
    }

    if (meta.data_directories.size() > 2 && meta.data_directories[2].first != 0 &&
        meta.data_directories[2].second != 0) {
        std::uint32_t res_rva = meta.data_directories[2].first;
        std::uint32_t res_off = detail::rva_to_offset(meta, res_rva);
        std::set<std::uint32_t> visited;
        detail::walk_resources(r, meta, res_rva, res_off, 0, 0, visited);
    }

    meta.data = std::move(bytes);
    return meta;
}

// bits per byte over the byte histogram; empty input is 0
inline double shannon_entropy(const std::uint8_t* data, std::size_t n) {
    if (n == 0) return 0.0;
    std::size_t hist[256] = {0};
    for (std::size_t i = 0; i < n; ++i) ++hist[data[i]];
    double h = 0.0;
    double total = static_cast<double>(n);
    for (std::size_t b = 0; b < 256; ++b) {
        if (hist[b] == 0) continue;
        double p = static_cast<double>(hist[b]) / total;
        h -= p * std::log2(p);
    }
    return h;
}

inline double shannon_entropy(const std::vector<std::uint8_t>& bytes) {
    return shannon_entropy(bytes.data(), bytes.size());
}

struct feature_vector {
    std::vector<std::string> names;
    std::vector<double> values;
};

inline std::vector<std::string> extractor_schema() {
    return {"Machine",
            "SizeOfOptionalHeader",
            "Characteristics",
            "MajorLinkerVersion",
            "MinorLinkerVersion",
            "SizeOfCode",
            "SizeOfInitializedData",
            "SizeOfUninitializedData",
            "AddressOfEntryPoint",
            "BaseOfCode",
            "BaseOfData",
            "ImageBase",
            "SectionAlignment",
            "FileAlignment",
            "MajorOperatingSystemVersion",
            "MinorOperatingSystemVersion",
            "MajorImageVersion",
            "MinorImageVersion",
            "MajorSubsystemVersion",
            "MinorSubsystemVersion",
            "SizeOfImage",
            "SizeOfHeaders",
            "CheckSum",
            "Subsystem",
            "DllCharacteristics",
            "SizeOfStackReserve",
            "SizeOfStackCommit",
            "SizeOfHeapReserve",
            "SizeOfHeapCommit",
            "LoaderFlags",
            "NumberOfRvaAndSizes",
            "SectionsNb",
            "SectionsMeanEntropy",
            "SectionsMinEntropy",
            "SectionsMaxEntropy",
            "SectionsMeanRawsize",
            "SectionsMinRawsize",
            "SectionMaxRawsize",
            "SectionsMeanVirtualsize",
            "SectionsMinVirtualsize",
            "SectionMaxVirtualsize",
            "ResourcesNb",
            "ResourcesMeanEntropy",
            "ResourcesMinEntropy",
            "ResourcesMaxEntropy",
            "ResourcesMeanSize",
            "ResourcesMinSize",
            "ResourcesMaxSize"};
}

namespace detail {

struct aggregate {
    double mean = 0.0, min = 0.0, max = 0.0;
};

// empty inputs aggregate to zeros, matching the dataset's resourceless rows
inline aggregate aggregate_values(const std::vector<double>& v) {
    aggregate a;
    if (v.empty()) return a;
    a.min = v[0];
    a.max = v[0];
    double sum = 0.0;
    for (double x : v) {
        sum += x;
        a.min = std::min(a.min, x);
        a.max = std::max(a.max, x);
    }
    a.mean = sum / static_cast<double>(v.size());
    return a;
}

} // namespace detail

inline feature_vector extract_features(const pe_metadata& meta) {
    std::vector<double> sec_entropy, sec_raw, sec_virt;
    for (const pe_section& s : meta.sections) {
        sec_entropy.push_back(shannon_entropy(meta.data.data() + s.raw_offset, s.raw_size));
        sec_raw.push_back(static_cast<double>(s.raw_size));
        sec_virt.push_back(static_cast<double>(s.virtual_size));
    }
    std::vector<double> res_entropy, res_size;
    for (const pe_resource_leaf& leaf : meta.resources) {
        res_entropy.push_back(
            shannon_entropy(meta.data.data() + leaf.file_offset, leaf.size));
        res_size.push_back(static_cast<double>(leaf.size));
    }
    detail::aggregate se = detail::aggregate_values(sec_entropy);
    detail::aggregate sr = detail::aggregate_values(sec_raw);
    detail::aggregate sv = detail::aggregate_values(sec_virt);
    detail::aggregate re = detail::aggregate_values(res_entropy);
    detail::aggregate rs = detail::aggregate_values(res_size);

    feature_vector fv;
    fv.names = extractor_schema();
    fv.values = {static_cast<double>(meta.machine),
                 static_cast<double>(meta.size_of_optional_header),
                 static_cast<double>(meta.characteristics),
                 static_cast<double>(meta.major_linker_version),
                 static_cast<double>(meta.minor_linker_version),
                 static_cast<double>(meta.size_of_code),
                 static_cast<double>(meta.size_of_initialized_data),
                 static_cast<double>(meta.size_of_uninitialized_data),
                 static_cast<double>(meta.address_of_entry_point),
                 static_cast<double>(meta.base_of_code),
                 static_cast<double>(meta.base_of_data),
                 static_cast<double>(meta.image_base),
                 static_cast<double>(meta.section_alignment),
                 static_cast<double>(meta.file_alignment),
                 static_cast<double>(meta.major_os_version),
                 static_cast<double>(meta.minor_os_version),
                 static_cast<double>(meta.major_image_version),
                 static_cast<double>(meta.minor_image_version),
                 static_cast<double>(meta.major_subsystem_version),
                 static_cast<double>(meta.minor_subsystem_version),
                 static_cast<double>(meta.size_of_image),
                 static_cast<double>(meta.size_of_headers),
                 static_cast<double>(meta.checksum),
                 static_cast<double>(meta.subsystem),
                 static_cast<double>(meta.dll_characteristics),
                 static_cast<double>(meta.size_of_stack_reserve),
                 static_cast<double>(meta.size_of_stack_commit),
                 static_cast<double>(meta.size_of_heap_reserve),
                 static_cast<double>(meta.size_of_heap_commit),
                 static_cast<double>(meta.loader_flags),
                 static_cast<double>(meta.number_of_rva_and_sizes),
                 static_cast<double>(meta.sections.size()),
                 se.mean,
                 se.min,
                 se.max,
                 sr.mean,
                 sr.min,
                 sr.max,
                 sv.mean,
                 sv.min,
                 sv.max,
                 static_cast<double>(meta.resources.size()),
                 re.mean,
                 re.min,
                 re.max,
                 rs.mean,
                 rs.min,
                 rs.max};
    return fv;
}

} // namespace ransomguard
