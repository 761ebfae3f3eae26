"""Bang-bang heater controller with a hysteresis band around the setpoint."""


class Controller:
    def __init__(self, setpoint=35.0, half_band=1.0):
        self.setpoint = setpoint
        self.half_band = half_band
        self.heater_on = False

    def step(self, temperature):
        if temperature < self.setpoint - self.half_band:
            self.heater_on = True
        elif temperature > self.setpoint + self.half_band:
            self.heater_on = False
        return self.heater_on
