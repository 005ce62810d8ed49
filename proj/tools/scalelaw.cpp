//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/cli.hpp"

int main(int argc, char **argv) { return scalelaw::run_cli(argc, argv); }
