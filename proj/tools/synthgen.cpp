#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ransomguard/error.hpp"
#include "ransomguard/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic PE header corpus generator"};

    ransomguard::synth_params params;
    std::string output = "synthetic.csv";
    app.add_option("--samples", params.samples, "number of rows")
        ->capture_default_str();
    app.add_option("--ransomware-fraction", params.ransomware_fraction)
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--seed", params.seed, "random seed")
        ->envname("RANSOMGUARD_SEED")
        ->capture_default_str();
    app.add_option("--output", output, "output csv path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ransomguard::errc::usage);
    }

    try {
        ransomguard::synth_dataset ds = ransomguard::synthesize_dataset(params);
        ransomguard::write_synthetic_csv(output, ds);
        std::size_t ransom = 0;
        for (int v : ds.legitimate)
            if (v == 0) ++ransom;
        std::cerr << "synthgen: wrote " << ds.names.size() << " rows (" << ransom
                  << " ransomware) to " << output << "\n";
    } catch (const ransomguard::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    }
    return 0;
}
