#include "rotopt/mesh.hpp"

#include <iostream>

int main() {
    std::cout << "rotopt cli placeholder\n";
    return 0;
}
