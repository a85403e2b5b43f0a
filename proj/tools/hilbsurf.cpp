/* Placeholder main; full CLI lands with the pipeline modules. */
#include "hilb/surface.hpp"
#include <cstdio>

int main() {
    std::printf("hilbsurf: CLI under construction\n");
    return 0;
}
