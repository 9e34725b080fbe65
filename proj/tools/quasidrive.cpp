#include "quasidrive/cli.hpp"

int main(int argc, char** argv)
{
    return quasidrive::cli::main_entry({argv + 1, argv + argc});
}
