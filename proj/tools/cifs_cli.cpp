#include <cstdio>
#include <iostream>

#include "cifs/cli.hpp"

int main(int argc, char** argv) {
    const auto report = cifs::run_command(argc, argv);
    if (report.command != "help" && report.command != "usage_error") {
        std::cout << report.body();
        std::fprintf(stderr, "wall_time_s=%.3f\n", report.wall_seconds);
    }
    return report.exit_code;
}
