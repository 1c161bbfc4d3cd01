from registry.lab import VerificationLab

# global lab instance; app.commands registers every command on it
lab_instance = VerificationLab("Benjamin-Ono Lab")
