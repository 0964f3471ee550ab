"""
Simulation modules for ising-qubits: spins, quantum reference, maps, classical operations,
chains, entangled constructions, continuous variables and the circuit pipeline
"""
