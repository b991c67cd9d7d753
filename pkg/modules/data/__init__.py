# Scenario input modules
