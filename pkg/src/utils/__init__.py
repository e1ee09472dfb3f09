# Utils Module
