// Command-line entry point. Subcommands are registered in cli.hpp; this file
// only dispatches and maps library errors to exit codes.
#include <exception>
#include <iostream>

#include "cli.hpp"
#include "gsqc/common.hpp"

int main(int argc, char** argv) {
    try {
        return gsqccli::run(argc, argv);
    } catch (const gsqc::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gsqc::configuration_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gsqc::capacity_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const gsqc::convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
