"""Email backend."""

class EmailMessenger:
    def send_message(self, recipient, message):
        return ("email", recipient, message)
