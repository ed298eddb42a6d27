#include "tablenet/cli.hpp"

int main(int argc, char** argv) { return tablenet::dispatch(argc, argv); }
