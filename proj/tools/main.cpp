// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

int main(int argc, char** argv) {
    return adlift::cli::run(argc, argv);
}
