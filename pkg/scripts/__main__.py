from scripts.prl.main import main

# Due to the project structure, this is just to allow running the program with python -m  scripts

main()
