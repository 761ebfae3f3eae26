"""Lumped thermal model of the incubator box: C dT/dt = P u - G (T - Tamb)."""


def step(temperature, heater_on, dt=1.0, C=300.0, P=20.0, G=0.5, ambient=21.0):
    u = 1.0 if heater_on else 0.0
    return temperature + dt * (P * u - G * (temperature - ambient)) / C
