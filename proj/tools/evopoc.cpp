#include "evopoc/cli/commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

int main(int argc, char** argv) {
    // stdout carries the JSON reports.
    spdlog::set_default_logger(spdlog::stderr_color_mt("evopoc"));
    return evopoc::cli::run(argc, argv, std::cout, std::cerr);
}
