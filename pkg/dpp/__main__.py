from dpp.run import main

main()
