#include "test_support.hpp"

#include <fstream>
#include <random>

namespace qbm2::fixtures {

std::filesystem::path source_dir() { return QBM2_SOURCE_DIR; }

std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

std::filesystem::path config_path(const std::string& name) { return source_dir() / "configs" / name; }

std::string regenerate_instruction()
{
    return "regenerate with:\n"
           "  cmake --build build --target qbm2_cli qbm2_golden_probe\n"
           "  python3 tests/oracles/make_goldens.py --build build";
}

std::filesystem::path golden_path(const std::string& name)
{
    auto path = golden_dir() / name;
    if (!std::filesystem::exists(path)) {
        throw MissingGolden("golden file " + path.string() + " is missing; " + regenerate_instruction());
    }
    return path;
}

nlohmann::json load_golden_json(const std::string& name)
{
    std::ifstream in(golden_path(name));
    return nlohmann::json::parse(in);
}

CsvTable load_csv_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return read_csv(in);
}

CsvTable load_golden_csv(const std::string& name) { return load_csv_file(golden_path(name)); }

std::filesystem::path scratch_dir(const std::string& tag)
{
    static std::mt19937_64 rng{std::random_device{}()};
    auto dir = std::filesystem::temp_directory_path() /
               ("qbm2_" + tag + "_" + std::to_string(rng() % 1000000000));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace qbm2::fixtures
