#include "hgvae/cli.hpp"

int main(int argc, char** argv) { return hgvae::run_cli(argc, argv); }
