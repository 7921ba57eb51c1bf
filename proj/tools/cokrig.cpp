#include <iostream>

#include <CLI11.hpp>

#include "cokrig/kernels.hpp"
#include "cokrig/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multivariate spatial co-kriging toolkit"};
    app.require_subcommand(1);

    cokrig::CliArgs args;
    std::string out, split;
    for (auto command : {cokrig::Command::simulate, cokrig::Command::fit, cokrig::Command::predict,
                         cokrig::Command::validate, cokrig::Command::diagnose}) {
        auto* sub = app.add_subcommand(std::string(cokrig::to_string(command)));
        sub->add_option("--config", args.config_path, "Config file")->required();
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--noise-split", split, "Measurement-error fraction per variable, e.g. 1=0.5,2=1");
        sub->callback([&args, command] { args.command = command; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cokrig::kExitInput;
    }
    if (!out.empty()) args.out_dir = out;
    if (!split.empty()) args.noise_split = split;

    cokrig::kernels::apply_thread_env();
    const auto outcome = cokrig::run_cli(args, std::cerr);
    if (outcome.status == cokrig::kExitOk) {
        for (const auto& f : outcome.files) std::cout << (outcome.out_dir / f).string() << '\n';
    }
    return outcome.status;
}
