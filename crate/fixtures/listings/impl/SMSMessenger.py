"""SMS backend."""

class SMSMessenger:
    def send_message(self, recipient, message):
        return ("sms", recipient, message)
