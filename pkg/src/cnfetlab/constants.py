"""Physical constants used by the simulator."""

# Boltzmann constant, J/K (2019 SI exact value)
BOLTZMANN = 1.380649e-23

# Default simulation temperature, K
ROOM_TEMPERATURE_K = 300.0

# Long-channel thermal noise factor for the FET channel noise model
# S_id = 4*k*T*GAMMA*gm  [A^2/Hz]
CHANNEL_NOISE_GAMMA = 2.0 / 3.0
