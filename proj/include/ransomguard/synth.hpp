#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ransomguard/csv.hpp"
#include "ransomguard/dataset.hpp"
#include "ransomguard/error.hpp"
#include "ransomguard/matrix.hpp"
#include "ransomguard/random.hpp"

namespace ransomguard {

// column order of the public PE-header corpus: Name and md5 metadata, 54
// numeric features, then the legitimate label
inline const std::vector<std::string>& public_numeric_columns() {
    static const std::vector<std::string> cols = {
        "Machine", "SizeOfOptionalHeader", "Characteristics", "MajorLinkerVersion",
        "MinorLinkerVersion", "SizeOfCode", "SizeOfInitializedData",
        "SizeOfUninitializedData", "AddressOfEntryPoint", "BaseOfCode", "BaseOfData",
        "ImageBase", "SectionAlignment", "FileAlignment",
        "MajorOperatingSystemVersion", "MinorOperatingSystemVersion",
        "MajorImageVersion", "MinorImageVersion", "MajorSubsystemVersion",
        "MinorSubsystemVersion", "SizeOfImage", "SizeOfHeaders", "CheckSum",
        "Subsystem", "DllCharacteristics", "SizeOfStackReserve", "SizeOfStackCommit",
        "SizeOfHeapReserve", "SizeOfHeapCommit", "LoaderFlags", "NumberOfRvaAndSizes",
        "SectionsNb", "SectionsMeanEntropy", "SectionsMinEntropy",
        "SectionsMaxEntropy", "SectionsMeanRawsize", "SectionsMinRawsize",
        "SectionMaxRawsize", "SectionsMeanVirtualsize", "SectionsMinVirtualsize",
        "SectionMaxVirtualsize", "ImportsNbDLL", "ImportsNb", "ImportsNbOrdinal",
        "ExportNb", "ResourcesNb", "ResourcesMeanEntropy", "ResourcesMinEntropy",
        "ResourcesMaxEntropy", "ResourcesMeanSize", "ResourcesMinSize",
        "ResourcesMaxSize", "LoadConfigurationSize", "VersionInformationSize",
    };
    return cols;
}

struct synth_params {
    std::size_t samples = 20000;
    double ransomware_fraction = 0.70;
    std::uint64_t seed = 42;
};

struct synth_dataset {
    std::vector<std::string> names;
    std::vector<std::string> md5s;
    std::vector<std::string> columns;
    matrix values;
    std::vector<int> legitimate;
};

namespace detail {

// fields with no discriminative content are held at typical PE32 values
inline const std::unordered_map<std::string, double>& synth_constants() {
    static const std::unordered_map<std::string, double> k = {
        {"Machine", 332},
        {"Characteristics", 258},
        {"MinorLinkerVersion", 0},
        {"SizeOfCode", 524288},
        {"SizeOfInitializedData", 524288},
        {"SizeOfUninitializedData", 0},
        {"BaseOfCode", 4096},
        {"BaseOfData", 8192},
        {"ImageBase", 4194304},
        {"FileAlignment", 512},
        {"MajorOperatingSystemVersion", 5},
        {"MajorImageVersion", 0},
        {"MinorImageVersion", 0},
        {"MajorSubsystemVersion", 5},
        {"MinorSubsystemVersion", 0},
        {"SizeOfImage", 1048576},
        {"CheckSum", 0},
        {"Subsystem", 2},
        {"DllCharacteristics", 0},
        {"SizeOfStackCommit", 4096},
        {"SizeOfHeapReserve", 1048576},
        {"SizeOfHeapCommit", 4096},
        {"NumberOfRvaAndSizes", 16},
        {"SectionsNb", 4},
        {"SectionsMeanEntropy", 5.0},
        {"SectionsMinRawsize", 512},
        {"SectionsMeanVirtualsize", 16384},
        {"SectionMaxVirtualsize", 65536},
        {"ImportsNbDLL", 4},
        {"ImportsNb", 64},
        {"ImportsNbOrdinal", 0},
        {"ExportNb", 0},
        {"ResourcesNb", 8},
        {"ResourcesMeanEntropy", 3.5},
        {"ResourcesMaxEntropy", 5.0},
        {"ResourcesMeanSize", 4096},
        {"ResourcesMinSize", 16},
        {"ResourcesMaxSize", 16384},
        {"LoadConfigurationSize", 72},
        {"VersionInformationSize", 16},
    };
    return k;
}

inline double clip(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

inline double rnd(double v) { return std::nearbyint(v); }

inline double pick(random_source& rng, const double* probs, const double* vals,
                   std::size_t n) {
    return vals[rng.weighted_index(probs, n)];
}

} // namespace detail

// Surrogate sampler for the public corpus. Class populations are mixtures
// over two latent archetypes (packed ransomware, managed-runtime legitimate)
// with a shared per-sample scale factor feeding the entropy and size fields,
// so features correlate the way real binaries do. Marginals were tuned until
// cross-validated behaviour of all five model families and the collinearity
// of the two Rawsize fields sat in the same ranges reported for the real
// corpus.
inline synth_dataset synthesize_dataset(const synth_params& params) {
    if (params.samples < 100) throw data_error("synthesize_dataset: need >= 100 samples");
    if (params.ransomware_fraction <= 0.0 || params.ransomware_fraction >= 1.0)
        throw data_error("synthesize_dataset: ransomware_fraction must be in (0,1)");

    const std::size_t n = params.samples;
    const std::size_t n_r = static_cast<std::size_t>(
        std::llround(params.ransomware_fraction * static_cast<double>(n)));

    synth_dataset out;
    out.columns = public_numeric_columns();
    out.values = matrix(n, out.columns.size());
    out.legitimate.assign(n, 0);
    out.names.resize(n);
    out.md5s.resize(n);

    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t c = 0; c < out.columns.size(); ++c) idx[out.columns[c]] = c;

    random_source rng(params.seed);
    random_source name_rng = rng.substream(999);

    using detail::clip;
    using detail::pick;
    using detail::rnd;

    const double log_4_2e4 = std::log(4.2e4);
    const double log_1e5 = std::log(1.0e5);
    const double log_1_4e3 = std::log(1.4e3);

    for (std::size_t i = 0; i < n; ++i) {
        const bool ransom = i < n_r;
        double* row = out.values.row_ptr(i);
        for (const auto& [name, value] : detail::synth_constants())
            row[idx.at(name)] = value;

        const bool packed = ransom && rng.uniform() < 0.76;
        const bool dotnet = !ransom && rng.uniform() < 0.15;
        const double g = rng.normal();

        double soh, mlv, aep, align, mosv, hdr, stack, loader;
        double min_e, max_e, res_e, lm, lv;

        if (ransom) {
            {
                const double p[] = {0.95, 0.05};
                const double v[] = {224, 240};
                soh = pick(rng, p, v, 2);
            }
            {
                const double p_packed[] = {0.38, 0.42, 0.16, 0.04};
                const double p_plain[] = {0.11, 0.30, 0.55, 0.04};
                std::size_t k = rng.weighted_index(packed ? p_packed : p_plain, 4);
                if (k == 0) mlv = rnd(rng.normal(9.0, 1.8));
                else if (k == 1) mlv = rnd(rng.normal(5.0, 1.2));
                else if (k == 2) mlv = 2.0;
                else mlv = std::floor(rng.uniform(15.0, 23.0));
                mlv = clip(mlv, 0, 255);
            }
            aep = rng.uniform() < 0.06 ? rnd(rng.uniform(2e6, 6e8))
                                       : rnd(std::exp(rng.normal(log_1e5, 0.8)));
            {
                const double p_packed[] = {0.82, 0.15, 0.03};
                const double p_plain[] = {0.25, 0.72, 0.03};
                const double v[] = {4096, 512, 8192};
                align = pick(rng, packed ? p_packed : p_plain, v, 3);
            }
            {
                const double p[] = {0.88, 0.09, 0.03};
                const double v[] = {0, 1, 2};
                mosv = pick(rng, p, v, 3);
            }
            {
                const double p_packed[] = {0.82, 0.10, 0.05, 0.03};
                const double p_plain[] = {0.40, 0.52, 0.05, 0.03};
                const double v[] = {1024, 512, 4096, -1};
                hdr = pick(rng, packed ? p_packed : p_plain, v, 4);
                if (hdr < 0) hdr = rnd(rng.uniform(16384.0, 1.5e6));
            }
            {
                const double p[] = {0.86, 0.08, 0.02, 0.04};
                const double v[] = {1048576, 4096, 262144, -1};
                stack = pick(rng, p, v, 4);
                if (stack < 0) stack = rnd(rng.uniform(3e7, 2e9));
            }
            loader = rng.uniform() < 0.05 ? rnd(rng.uniform(1e3, 4.2e9)) : 0.0;

            min_e = packed ? 3.60 + 0.55 * g + 0.45 * rng.normal()
                           : 2.05 + 0.55 * g + 0.50 * rng.normal();
            if (rng.uniform() < 0.06) min_e = std::fabs(rng.normal(0.1, 0.1));
            max_e = packed ? 7.45 + 0.22 * g + 0.28 * rng.normal()
                           : 6.15 + 0.40 * g + 0.45 * rng.normal();
            res_e = packed ? 5.60 + 0.50 * g + 0.70 * rng.normal()
                           : 3.00 + 0.50 * g + 0.80 * rng.normal();
            if (rng.uniform() < 0.05) res_e = 0.0;
            lm = log_4_2e4 + 0.70 * g + 0.45 * rng.normal() - 0.42;
            lv = log_1_4e3 + 0.70 * g + 0.75 * rng.normal() + 0.80;
        } else {
            {
                const double p[] = {0.68, 0.32};
                const double v[] = {224, 240};
                soh = pick(rng, p, v, 2);
            }
            {
                const double p[] = {0.80, 0.14, 0.06};
                std::size_t k = rng.weighted_index(p, 3);
                if (k == 0) mlv = rnd(rng.normal(11.0, 1.6));
                else if (k == 1) mlv = rnd(rng.normal(8.0, 1.0));
                else mlv = 6.0;
                mlv = clip(mlv, 0, 14);
            }
            aep = rnd(std::exp(rng.normal(log_4_2e4, 0.78)));
            {
                const double p[] = {0.88, 0.09, 0.03};
                const double v[] = {4096, 8192, 512};
                align = pick(rng, p, v, 3);
            }
            {
                const double p[] = {0.46, 0.29, 0.25};
                const double v[] = {0, 1, 3};
                mosv = pick(rng, p, v, 3);
            }
            {
                const double p[] = {0.58, 0.39, 0.03};
                const double v[] = {1024, 4096, 512};
                hdr = pick(rng, p, v, 3);
            }
            {
                const double p[] = {0.68, 0.16, 0.16};
                const double v[] = {1048576, 262144, 2097152};
                stack = pick(rng, p, v, 3);
            }
            loader = rng.uniform() < 0.004 ? 1.0 : 0.0;

            min_e = 2.0 + 0.55 * g + 0.50 * rng.normal();
            max_e = dotnet ? 7.30 + 0.18 * g + 0.25 * rng.normal()
                           : 5.85 + 0.40 * g + 0.50 * rng.normal();
            res_e = dotnet ? 2.60 + 0.40 * g + 0.55 * rng.normal()
                           : 2.85 + 0.50 * g + 0.80 * rng.normal();
            if (rng.uniform() < 0.06) res_e = 0.0;
            lm = log_4_2e4 + 0.70 * g + 0.45 * rng.normal();
            lv = log_1_4e3 + 0.70 * g + 0.75 * rng.normal();
        }

        lm = clip(lm, 8.815, 12.475);
        double mean_raw = rnd(std::exp(lm));
        double max_raw = rnd(mean_raw * std::exp(rng.normal(0.42, 0.159)));

        row[idx.at("SizeOfOptionalHeader")] = soh;
        row[idx.at("MajorLinkerVersion")] = mlv;
        row[idx.at("AddressOfEntryPoint")] = aep;
        row[idx.at("SectionAlignment")] = align;
        row[idx.at("MinorOperatingSystemVersion")] = mosv;
        row[idx.at("SizeOfHeaders")] = hdr;
        row[idx.at("SizeOfStackReserve")] = stack;
        row[idx.at("LoaderFlags")] = loader;
        row[idx.at("SectionsMinEntropy")] = clip(min_e, 0, 8);
        row[idx.at("SectionsMaxEntropy")] = clip(max_e, 0, 8);
        row[idx.at("ResourcesMinEntropy")] = clip(res_e, 0, 8);
        row[idx.at("SectionsMeanRawsize")] = mean_raw;
        row[idx.at("SectionMaxRawsize")] = max_raw;
        row[idx.at("SectionsMinVirtualsize")] = rnd(std::exp(lv));

        out.legitimate[i] = ransom ? 0 : 1;
        char name_buf[32];
        std::snprintf(name_buf, sizeof(name_buf), "sample_%06zu.exe", i);
        out.names[i] = name_buf;
        out.md5s[i] = hex64(name_rng.next_u64()) + hex64(name_rng.next_u64());
    }
    return out;
}

inline void write_synthetic_csv(const std::string& path, const synth_dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file: " + path);
    out << "Name,md5";
    for (const std::string& c : ds.columns) out << ',' << c;
    out << ",legitimate\n";
    for (std::size_t i = 0; i < ds.values.rows(); ++i) {
        out << ds.names[i] << ',' << ds.md5s[i];
        const double* row = ds.values.row_ptr(i);
        for (std::size_t c = 0; c < ds.values.cols(); ++c)
            out << ',' << format_double(row[c]);
        out << ',' << ds.legitimate[i] << '\n';
    }
    if (!out) throw data_error("failed writing output file: " + path);
}

// in-memory equivalent of writing the csv and loading it back
inline feature_table synthetic_feature_table(const synth_params& params,
                                             class_label positive_class) {
    synth_dataset ds = synthesize_dataset(params);
    feature_table table;
    table.columns = ds.columns;
    table.values = std::move(ds.values);
    table.positive_class = positive_class;
    table.labels.resize(ds.legitimate.size());
    for (std::size_t i = 0; i < ds.legitimate.size(); ++i) {
        int legit = ds.legitimate[i];
        table.labels[i] = positive_class == class_label::legitimate ? legit : 1 - legit;
    }
    return table;
}

} // namespace ransomguard
