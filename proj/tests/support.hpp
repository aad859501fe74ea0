#pragma once

#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sigcmp::support {

inline nlohmann::json load_fixture(const std::string& name) {
    std::ifstream in(std::string(SIGCMP_FIXTURE_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    return nlohmann::json::parse(in);
}

inline std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double mu = 0.0, double sigma = 1.0) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> dist(mu, sigma);
    std::vector<double> out(n);
    for (auto& x : out) x = dist(eng);
    return out;
}

inline std::string paired_csv(const std::vector<double>& u, const std::vector<double>& v, bool header = true) {
    std::ostringstream out;
    out.precision(17);
    if (header) out << "system_a,system_b\n";
    for (std::size_t i = 0; i < u.size(); ++i) out << u[i] << ',' << v[i] << '\n';
    return out.str();
}

}  // namespace sigcmp::support
