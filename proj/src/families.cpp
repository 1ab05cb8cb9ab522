namespace cgdms {}
