#include "tomoseg/harness.hpp"

int main(int argc, char** argv) {
    return tomoseg::cli_main(argc, argv);
}
