#include <iostream>

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    std::cerr << "tfa: cli not wired yet\n";
    return 1;
}
