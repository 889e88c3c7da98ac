#include <iostream>

#include <CLI11.hpp>

#include "qbm2/app/commands.hpp"

int main(int argc, char** argv)
{
    using namespace qbm2::app;

    CLI::App cli{"Exact master-equation toolkit for two oscillators in a common bath"};
    cli.set_version_flag("--version", std::string{"qbm2 "} + QBM2_VERSION);
    cli.require_subcommand(1);

    std::string config;
    std::string out = ".";
    std::size_t stride = 0;
    double threshold = 0.0;
    std::string format = "csv";
    bool compare = false;

    for (const auto& name : command_names()) {
        auto* sub = cli.add_subcommand(name);
        sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--stride", stride, "output every n-th grid point")->check(CLI::PositiveNumber);
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        if (name == "oracle") {
            sub->add_option("--threshold", threshold, "maximum relative covariance error")
                ->check(CLI::PositiveNumber);
            sub->add_flag("--compare", compare, "exit 3 when the threshold is exceeded");
        }
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    CommandOptions opt;
    opt.out_dir = out;
    if (stride > 0) {
        opt.stride = stride;
    }
    if (threshold > 0.0) {
        opt.threshold = threshold;
    }
    opt.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    opt.compare = compare;

    const auto* sub = cli.get_subcommands().front();
    return run_command(sub->get_name(), config, opt, std::cerr);
}
